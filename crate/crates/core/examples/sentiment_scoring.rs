//! Score a handful of headlines with the bundled lexicon, then roll them up
//! into per-day, per-source means.

use blendcast::dataset::SOURCES;
use blendcast::sentiment::{compound_score, score_headlines, Lexicon};

fn main() -> blendcast::Result<()> {
    let lex = Lexicon::reference();
    println!("lexicon: {} entries from {} lines", lex.len(), lex.lines_read());

    for title in [
        "Stocks surge as strong earnings impress investors",
        "Markets are not great after the selloff",
        "Investors extremely worried about trade war",
        "Fed holds rates steady",
        "Fed holds rates steady, avoiding a very painful shock",
    ] {
        let r = compound_score(&lex, title);
        println!(
            "{:>7.4}  (raw {:>5.2}, {} tokens)  {title}",
            r.compound, r.raw_sum, r.token_count
        );
    }

    let csv = "date,source,title\n\
               2018-05-01,wsj,Stocks rally as earnings beat expectations\n\
               2018-05-01,wsj,Tech shares slump\n\
               2018-05-01,reuters,Oil prices surge on supply fears\n\
               2018-05-02,cnbc,Dow closes higher in strong session\n\
               2018-05-02,fortune,Retailers face a bleak holiday outlook\n";
    println!("\ndate        {}", SOURCES.map(|s| format!("{s:>8}")).join(""));
    for day in score_headlines(csv.as_bytes(), "inline", &lex)? {
        let cells: String = day
            .compounds
            .iter()
            .map(|c| c.map_or(format!("{:>8}", "-"), |v| format!("{v:>8.4}")))
            .collect();
        println!("{}  {cells}", day.date);
    }
    Ok(())
}
