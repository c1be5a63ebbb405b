#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_pmstat");

/// `(config, subcommand, expected exit status)`.
pub const REGRESSION: [(&str, &str, i32); 8] = [
    ("square_indicator.toml", "analyze", 0),
    ("tail_block.toml", "analyze", 0),
    ("polynomial_order.toml", "estimate-order", 0),
    ("constant_zero.toml", "estimate-order", 0),
    ("window_inclusion.toml", "theorems", 0),
    ("log_window.toml", "theorems", 0),
    ("bad_eps.toml", "analyze", 2),
    ("short_table.toml", "analyze", 2),
];

pub fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

pub fn run_config(command: &str, config: &str, out: &Path) -> Output {
    let cfg = configs().join(config);
    run(&[
        command,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
}

/// Relative path -> contents for every file under `dir`.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let Ok(entries) = std::fs::read_dir(&d) else {
            continue;
        };
        for e in entries {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.insert(
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
    }
    files
}
