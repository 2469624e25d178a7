//! Regenerates `tests/fixtures/vaughan_growth.json`:
//!
//!     cargo run --release -p prime-points --example calibrate_growth > crates/core/tests/fixtures/vaughan_growth.json

use prime_points::vaughan::{growth_report, CountOptions, LinearEquation};

fn main() {
    let ts = [500, 1000, 2000];
    let opts = CountOptions::default();
    let good = LinearEquation::new(vec![1, 1, 1], 11).unwrap();
    let bad = LinearEquation::new(vec![1, 1, 1], 4).unwrap();
    let g = growth_report(&good, &ts, &opts).unwrap();
    let b = growth_report(&bad, &ts, &opts).unwrap();
    let ratio = g[2].normalized / b[2].normalized;
    let out = serde_json::json!({
        "command": "cargo run --release -p prime-points --example calibrate_growth",
        "mode": "signed",
        "bounds": ts,
        "solvable": {"alphas": [1, 1, 1], "m": 11, "rows": g},
        "failing": {"alphas": [1, 1, 1], "m": 4, "rows": b},
        "observed_ratio_at_2000": ratio,
        "required_factor": 5.0,
    });
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
}
