//! Evaluate two forecasts against actual closes and print them next to an
//! externally reported baseline.

use blendcast::metrics::{evaluate, format_table, ExternalColumn};

fn main() -> blendcast::Result<()> {
    let prev = [2700.0, 2712.5, 2705.1, 2721.8, 2718.0, 2730.4, 2724.9, 2741.3, 2735.0];
    let actual = [2712.5, 2705.1, 2721.8, 2718.0, 2730.4, 2724.9, 2741.3, 2735.0, 2748.6];
    let follower = [2703.0, 2709.9, 2710.2, 2716.5, 2722.1, 2729.7, 2730.0, 2737.2, 2739.8];
    let trend = [2708.0, 2714.0, 2711.0, 2725.5, 2723.0, 2729.0, 2733.5, 2744.0, 2741.2];

    let follower = evaluate(&actual, &follower, &prev)?;
    let trend = evaluate(&actual, &trend, &prev)?;
    let c = &trend.confusion;
    println!("trend confusion: tp {} fp {} fn {} tn {}", c.tp, c.fp, c.fn_, c.tn);

    let columns = vec![
        ExternalColumn::from(("Follower", &follower)),
        ExternalColumn::from(("Trend", &trend)),
        ExternalColumn {
            name: "DP-LSTM".into(),
            mse: Some(198.57),
            ..ExternalColumn::default()
        },
    ];
    print!("{}", format_table(&columns));
    Ok(())
}
