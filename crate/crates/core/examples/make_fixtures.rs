//! Writes a seeded synthetic input set (four Yahoo-style price files and a
//! JHU-style case table) plus a sample manifest.
//!
//! cargo run -p wavecast --example make_fixtures -- <dir> [rows] [seed]

use std::path::PathBuf;

use wavecast::synthetic::{synthetic_sources, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "fixtures".into()));
    let rows = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1200);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2020);
    let spec = SyntheticSpec { rows, seed, inject_null: true, ..Default::default() };
    let sources = synthetic_sources(&spec);
    std::fs::create_dir_all(&dir)?;
    for (name, csv) in &sources.ohlcv {
        std::fs::write(dir.join(format!("{name}.csv")), csv)?;
    }
    std::fs::write(dir.join("confirmed_global.csv"), &sources.cases)?;
    std::fs::write(
        dir.join("run.manifest"),
        "\
# Small end-to-end run over the synthetic inputs in this directory.
crude_oil = crude_oil.csv
dji = dji.csv
sp500 = sp500.csv
nasdaq = nasdaq.csv
cases = confirmed_global.csv
out = out

seed = 7
mode = WT_ADA
target = crude_oil
lookback = 32
horizon = 5
epochs = 3
batch_size = 32

bdlstm = 8
fc = 4
budget = random_4
grid.bdlstm = 8 | 8-8
grid.fc = 4
grid.activation = tanh | relu
grid.optimizer = adam
grid.learning_rate = 0.01 | 0.001
grid.decay = 1e-6
grid.l2 = 1e-4
",
    )?;
    println!("wrote {rows} rows (seed {seed}) to {}", dir.display());
    Ok(())
}
