//! Lexicon-and-rules headline sentiment in the style of VADER.
//!
//! Implemented rules: lexicon lookup on lowercased tokens, degree boosters
//! from up to three preceding tokens, negation from up to three preceding
//! tokens, and the `s / sqrt(s² + 15)` compound normalisation. Capitalisation
//! emphasis, punctuation amplification, "but" reweighting, "least"/"no"
//! special cases and idioms are deliberately left out; headlines rarely
//! trigger them.
//!
//! ```
//! use blendcast::sentiment::{compound_score, Lexicon};
//!
//! let lex = Lexicon::reference();
//! let r = compound_score(&lex, "Stocks rally on very good jobs report");
//! assert!((r.raw_sum - (1.9 + 0.293)).abs() < 1e-12);
//! assert!(r.compound > 0.49 && r.compound < 0.5);
//! assert_eq!(compound_score(&lex, "").compound, 0.0);
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use crate::dataset::{self, DateFormat, HEADER, SOURCES};
use crate::error::{Error, Result};

/// Normalisation constant of the compound score.
pub const ALPHA: f64 = 15.0;
pub const BOOST_INCREMENT: f64 = 0.293;
pub const NEGATION_SCALAR: f64 = -0.74;

const REFERENCE_LEXICON: &str = include_str!("../data/vader_lexicon.txt");

const NEGATORS: &[&str] = &[
    "aint",
    "arent",
    "cannot",
    "cant",
    "couldnt",
    "darent",
    "didnt",
    "doesnt",
    "ain't",
    "aren't",
    "can't",
    "couldn't",
    "daren't",
    "didn't",
    "doesn't",
    "dont",
    "hadnt",
    "hasnt",
    "havent",
    "isnt",
    "mightnt",
    "mustnt",
    "neither",
    "don't",
    "hadn't",
    "hasn't",
    "haven't",
    "isn't",
    "mightn't",
    "mustn't",
    "neednt",
    "needn't",
    "never",
    "none",
    "nope",
    "nor",
    "not",
    "nothing",
    "nowhere",
    "oughtnt",
    "shant",
    "shouldnt",
    "uhuh",
    "wasnt",
    "werent",
    "oughtn't",
    "shan't",
    "shouldn't",
    "uh-uh",
    "wasn't",
    "weren't",
    "without",
    "wont",
    "wouldnt",
    "won't",
    "wouldn't",
    "rarely",
    "seldom",
    "despite",
];

const BOOSTERS_UP: &[&str] = &[
    "absolutely",
    "amazingly",
    "awfully",
    "completely",
    "considerable",
    "considerably",
    "decidedly",
    "deeply",
    "effing",
    "enormous",
    "enormously",
    "entirely",
    "especially",
    "exceptional",
    "exceptionally",
    "extreme",
    "extremely",
    "fabulously",
    "flipping",
    "flippin",
    "frackin",
    "fracking",
    "fricking",
    "frickin",
    "frigging",
    "friggin",
    "fully",
    "fuckin",
    "fucking",
    "fuggin",
    "fugging",
    "greatly",
    "hella",
    "highly",
    "hugely",
    "incredible",
    "incredibly",
    "intensely",
    "major",
    "majorly",
    "more",
    "most",
    "particularly",
    "purely",
    "quite",
    "really",
    "remarkably",
    "so",
    "substantially",
    "thoroughly",
    "total",
    "totally",
    "tremendous",
    "tremendously",
    "uber",
    "unbelievably",
    "unusually",
    "utter",
    "utterly",
    "very",
];

// Multi-word dampeners ("just enough", "kind of", "sort of") are not listed:
// a single-token lookup can never match them.
const BOOSTERS_DOWN: &[&str] = &[
    "almost",
    "barely",
    "hardly",
    "kinda",
    "kindof",
    "kind-of",
    "less",
    "little",
    "marginal",
    "marginally",
    "occasional",
    "occasionally",
    "partly",
    "scarce",
    "scarcely",
    "slight",
    "slightly",
    "somewhat",
    "sorta",
    "sortof",
    "sort-of",
];

/// Token valences plus the booster and negator word lists.
#[derive(Clone, Debug)]
pub struct Lexicon {
    valences: HashMap<String, f64>,
    boosters: HashMap<String, f64>,
    negators: HashSet<String>,
    lines_read: usize,
    duplicates: usize,
}

impl Lexicon {
    /// The bundled reference lexicon (MIT-licensed, see `data/VADER_LICENSE.txt`).
    pub fn reference() -> Self {
        parse_lexicon_str(REFERENCE_LEXICON, "<bundled lexicon>").expect("bundled lexicon parses")
    }

    /// Builds a lexicon from explicit valences with the standard booster and
    /// negator lists.
    pub fn from_valences<'a>(entries: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        let mut lex = Lexicon::empty();
        for (t, v) in entries {
            lex.valences.insert(t.to_lowercase(), v);
        }
        lex
    }

    fn empty() -> Self {
        let boosters = BOOSTERS_UP
            .iter()
            .map(|w| (w.to_string(), BOOST_INCREMENT))
            .chain(BOOSTERS_DOWN.iter().map(|w| (w.to_string(), -BOOST_INCREMENT)))
            .collect();
        Lexicon {
            valences: HashMap::new(),
            boosters,
            negators: NEGATORS.iter().map(|w| w.to_string()).collect(),
            lines_read: 0,
            duplicates: 0,
        }
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.valences.get(&token.to_lowercase()).copied()
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }

    /// Non-blank lines read from the source file.
    pub fn lines_read(&self) -> usize {
        self.lines_read
    }

    /// Lines whose (lowercased) token had already been seen.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    fn booster(&self, lower: &str) -> Option<f64> {
        self.boosters.get(lower).copied()
    }

    fn is_negator(&self, lower: &str) -> bool {
        self.negators.contains(lower) || lower.contains("n't")
    }
}

pub fn parse_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lexicon_str(&text, &path.display().to_string())
}

/// Parses `token<TAB>valence[<TAB>ignored...]` lines. Tokens are stored
/// lowercased. An entry written in lowercase takes precedence over one that
/// only matches after case folding; otherwise the last occurrence wins.
pub fn parse_lexicon_str(text: &str, origin: &str) -> Result<Lexicon> {
    let mut lex = Lexicon::empty();
    let mut native: HashSet<String> = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        lex.lines_read += 1;
        let mut fields = line.split('\t');
        let token = fields.next().unwrap_or_default().trim();
        let raw = fields.next().unwrap_or_default().trim();
        let valence = raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse {
                path: origin.to_string(),
                line: idx as u64 + 1,
                message: format!("valence for `{token}` is not a number: `{raw}`"),
            })?;
        if token.is_empty() {
            return Err(Error::Parse {
                path: origin.to_string(),
                line: idx as u64 + 1,
                message: "empty token".into(),
            });
        }
        let lower = token.to_lowercase();
        let is_native = lower == token;
        if let Some(old) = lex.valences.get(&lower) {
            lex.duplicates += 1;
            if !is_native && native.contains(&lower) {
                continue;
            }
            if *old != valence {
                log::warn!("{origin}: line {}: `{token}` redefined ({old} -> {valence})", idx + 1);
            }
        }
        if is_native {
            native.insert(lower.clone());
        }
        lex.valences.insert(lower, valence);
    }
    if lex.lines_read == 0 {
        return Err(Error::Data {
            path: origin.to_string(),
            message: "lexicon is empty".into(),
        });
    }
    Ok(lex)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SentimentResult {
    pub compound: f64,
    pub raw_sum: f64,
    /// Tokens after whitespace splitting.
    pub token_count: usize,
}

/// `s / sqrt(s² + α)`, clamped to `[-1, 1]`.
pub fn normalize(raw_sum: f64) -> f64 {
    (raw_sum / (raw_sum * raw_sum + ALPHA).sqrt()).clamp(-1.0, 1.0)
}

/// Splits on whitespace and trims ASCII punctuation from both ends of each
/// token, unless that would leave two characters or fewer (emoticons).
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace()
        .map(|tok| {
            let stripped = tok.trim_matches(|c: char| c.is_ascii_punctuation());
            if stripped.chars().count() <= 2 {
                tok
            } else {
                stripped
            }
        })
        .collect()
}

pub fn compound_score(lex: &Lexicon, title: &str) -> SentimentResult {
    let tokens: Vec<String> = tokenize(title).iter().map(|t| t.to_lowercase()).collect();
    let mut raw_sum = 0.0;
    for (i, tok) in tokens.iter().enumerate() {
        if lex.booster(tok).is_some() {
            continue;
        }
        let Some(mut valence) = lex.valences.get(tok).copied() else {
            continue;
        };
        for back in 0..3 {
            if i <= back {
                break;
            }
            let prev = &tokens[i - back - 1];
            if lex.valences.contains_key(prev) {
                continue;
            }
            if let Some(b) = lex.booster(prev) {
                let mut s = if valence < 0.0 { -b } else { b };
                s *= [1.0, 0.95, 0.9][back];
                valence += s;
            }
            if lex.is_negator(prev) {
                valence *= NEGATION_SCALAR;
            }
        }
        raw_sum += valence;
    }
    SentimentResult {
        compound: if raw_sum == 0.0 { 0.0 } else { normalize(raw_sum) },
        raw_sum,
        token_count: tokens.len(),
    }
}

/// Per-date mean compound for each source; `None` where a source had no headline.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadlineDay {
    pub date: NaiveDate,
    pub compounds: [Option<f64>; 4],
}

pub fn score_headlines_csv(path: impl AsRef<Path>, lex: &Lexicon) -> Result<Vec<HeadlineDay>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    score_headlines(file, &path.display().to_string(), lex)
}

/// Reads `date,source,title` rows and averages compounds per (date, source).
pub fn score_headlines<R: Read>(reader: R, origin: &str, lex: &Lexicon) -> Result<Vec<HeadlineDay>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    if header != ["date", "source", "title"] {
        return Err(Error::Data {
            path: origin.to_string(),
            message: format!("header must be `date,source,title`, found `{}`", header.join(",")),
        });
    }
    let mut sums: BTreeMap<NaiveDate, [(f64, usize); 4]> = BTreeMap::new();
    let mut format: Option<DateFormat> = None;
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let err = |message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        if row.len() != 3 {
            return Err(err(format!("expected 3 fields, found {}", row.len())));
        }
        let fmt = match format {
            Some(f) => f,
            None => *format
                .insert(DateFormat::detect(&row[0]).ok_or_else(|| err(format!("unrecognised date `{}`", &row[0])))?),
        };
        let date = fmt.parse(&row[0]).ok_or_else(|| {
            err(format!(
                "date `{}` does not match the file's {fmt:?} date format",
                &row[0]
            ))
        })?;
        let source = row[1].trim().to_ascii_lowercase();
        let k = SOURCES
            .iter()
            .position(|s| *s == source)
            .ok_or_else(|| err(format!("unknown source `{}`; allowed: {}", &row[1], SOURCES.join(", "))))?;
        let slot = &mut sums.entry(date).or_insert([(0.0, 0); 4])[k];
        slot.0 += compound_score(lex, &row[2]).compound;
        slot.1 += 1;
    }
    if sums.is_empty() {
        return Err(Error::Data {
            path: origin.to_string(),
            message: "no headlines".into(),
        });
    }
    Ok(sums
        .into_iter()
        .map(|(date, s)| HeadlineDay {
            date,
            compounds: s.map(|(sum, n)| (n > 0).then(|| sum / n as f64)),
        })
        .collect())
}

/// Reads a `date,adj_close` price file.
pub fn load_prices(path: impl AsRef<Path>) -> Result<BTreeMap<NaiveDate, f64>> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    if header != ["date", "adj_close"] {
        return Err(Error::Data {
            path: origin,
            message: format!("header must be `date,adj_close`, found `{}`", header.join(",")),
        });
    }
    let mut prices = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let err = |message: String| Error::Parse {
            path: origin.clone(),
            line,
            message,
        };
        let date = dataset::parse_date(&row[0]).map_err(|e| err(e.to_string()))?;
        if dataset::is_missing(&row[1]) {
            continue;
        }
        let p: f64 = row[1]
            .trim()
            .parse()
            .map_err(|_| err(format!("not a price: `{}`", &row[1])))?;
        if prices.insert(date, p).is_some() {
            return Err(err(format!("duplicate date {date}")));
        }
    }
    Ok(prices)
}

/// Writes the six-column dataset. With `prices`, one row per price date
/// (compounds left empty where no headline exists); without, one row per
/// headline date and an empty `adj_close`.
pub fn write_scored_csv<W: Write>(
    days: &[HeadlineDay],
    prices: Option<&BTreeMap<NaiveDate, f64>>,
    writer: W,
) -> Result<()> {
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    let by_date: BTreeMap<NaiveDate, &[Option<f64>; 4]> = days.iter().map(|d| (d.date, &d.compounds)).collect();
    let mut emit = |date: NaiveDate, c: Option<&[Option<f64>; 4]>, price: Option<f64>| {
        let c = c.copied().unwrap_or([None; 4]);
        w.write_record([date.to_string(), fmt(c[0]), fmt(c[1]), fmt(c[2]), fmt(c[3]), fmt(price)])
    };
    match prices {
        Some(prices) => {
            for (&date, &p) in prices {
                emit(date, by_date.get(&date).copied(), Some(p))?;
            }
        }
        None => {
            for (&date, c) in &by_date {
                emit(date, Some(c), None)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> Lexicon {
        Lexicon::from_valences([("good", 1.9), ("bad", -2.5), ("gain", 2.4)])
    }

    #[test]
    fn empty_and_unmatched_titles_score_zero() {
        assert_eq!(compound_score(&lex(), "").compound, 0.0);
        assert_eq!(compound_score(&lex(), "Quarterly report released").compound, 0.0);
    }

    #[test]
    fn booster_and_negation() {
        let plain = compound_score(&lex(), "good").raw_sum;
        assert_eq!(plain, 1.9);
        assert!((compound_score(&lex(), "very good").raw_sum - (1.9 + 0.293)).abs() < 1e-12);
        assert!((compound_score(&lex(), "very bad").raw_sum - (-2.5 - 0.293)).abs() < 1e-12);
        assert!((compound_score(&lex(), "very much good").raw_sum - (1.9 + 0.95 * 0.293)).abs() < 1e-12);
        assert!((compound_score(&lex(), "not good").raw_sum - 1.9 * -0.74).abs() < 1e-12);
        assert!((compound_score(&lex(), "isn't really good").raw_sum - (1.9 + 0.293) * -0.74).abs() < 1e-12);
        assert_eq!(compound_score(&lex(), "not a b c good").raw_sum, 1.9);
    }

    #[test]
    fn lexicon_words_block_modifiers() {
        // "bad" sits between the booster and "good" and cannot modify it, but
        // "very" still reaches "good" from two tokens back at 0.95 strength.
        let r = compound_score(&lex(), "very bad good").raw_sum;
        assert!((r - (-2.5 - 0.293 + 1.9 + 0.95 * 0.293)).abs() < 1e-12);
    }

    #[test]
    fn tokenizer_keeps_short_tokens_intact() {
        assert_eq!(tokenize("Good, (bad) :) U.S."), vec!["Good", "bad", ":)", "U.S"]);
    }

    #[test]
    fn lexicon_parsing() {
        let lex = parse_lexicon_str("good\t1.9\t0.5\t[1]\nGood\t3.0\nbad\t-2.5\n", "t").unwrap();
        assert_eq!(lex.valence("good"), Some(1.9));
        assert_eq!(lex.len(), 2);
        assert_eq!((lex.lines_read(), lex.duplicates()), (3, 1));
        let dup = parse_lexicon_str("ok\t1.6\nok\t1.2\n", "t").unwrap();
        assert_eq!(dup.valence("ok"), Some(1.2));
        match parse_lexicon_str("good\t1.9\nbad\tworse\n", "t") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_lexicon_str("\n\n", "t").is_err());
    }

    #[test]
    fn reference_lexicon_loads() {
        let lex = Lexicon::reference();
        assert_eq!(lex.valence("good"), Some(1.9));
        assert_eq!(lex.lines_read(), 7520);
        assert_eq!(lex.len(), 7494);
        assert_eq!(lex.valence(":P"), Some(1.0));
    }

    #[test]
    fn normalisation() {
        assert_eq!(normalize(0.0), 0.0);
        assert!((normalize(1.0) - 0.25).abs() < 1e-15);
        assert_eq!(normalize(-3.0), -normalize(3.0));
    }
}
