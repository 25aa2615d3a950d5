// Copyright (c) The detcode Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use detcode_core::cluster::{
    bandwidth_csv, bandwidth_table, capacity_csv, capacity_curve, BandwidthCurve, Cluster,
    RepairEvent, RepairMode,
};
use detcode_core::galois::next_prime;
use detcode_core::{CodeConfig, Field};

/// Determinant regenerating codes: encode files into shards, recover them,
/// and repair lost nodes with minimal traffic.
#[derive(Parser, Debug)]
#[command(name = "detcode", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split a file into n shard files
    Encode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        /// field modulus, at least 257 for byte data
        #[arg(long, default_value_t = 257)]
        prime: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild the original file from d shards
    Recover {
        #[arg(long)]
        shards: PathBuf,
        /// node ids to read (default: the first d available)
        #[arg(long, value_delimiter = ',')]
        nodes: Option<Vec<usize>>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Regenerate one lost shard
    Repair {
        #[arg(long)]
        shards: PathBuf,
        #[arg(long)]
        failed: usize,
        #[arg(long, value_delimiter = ',')]
        helpers: Option<Vec<usize>>,
    },
    /// Regenerate several lost shards at once
    Multirepair {
        #[arg(long)]
        shards: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        failed: Vec<usize>,
        #[arg(long, value_enum)]
        mode: MultiMode,
        #[arg(long, value_delimiter = ',')]
        helpers: Option<Vec<usize>>,
    },
    /// Check every shard against the stored data
    Verify {
        #[arg(long)]
        shards: PathBuf,
    },
    /// Per-helper repair bandwidth for e = 1..emax failures
    Bandwidth {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        emax: usize,
        #[arg(long, value_enum, default_value_t = CurveArg::All)]
        mode: CurveArg,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Stored file size F as the number of nodes grows
    Capacity {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        nmax: usize,
        /// smallest n (default: d + 1)
        #[arg(long)]
        nmin: Option<usize>,
        /// field modulus (default: smallest prime above nmax)
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MultiMode {
    Naive,
    Joint,
    Centralized,
}

impl From<MultiMode> for RepairMode {
    fn from(m: MultiMode) -> Self {
        match m {
            MultiMode::Naive => RepairMode::Naive,
            MultiMode::Joint => RepairMode::Joint,
            MultiMode::Centralized => RepairMode::Centralized,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CurveArg {
    Naive,
    Joint,
    Centralized,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Command::Encode {
            input,
            n,
            d,
            m,
            prime,
            out,
        } => encode(&input, n, d, m, prime, &out)?,
        Command::Recover {
            shards,
            nodes,
            output,
        } => {
            let cluster = load(&shards)?;
            let bytes = cluster.recover_file(nodes.as_deref())?;
            fs::write(&output, &bytes).with_context(|| format!("writing {}", output.display()))?;
            println!("recovered {} bytes to {}", bytes.len(), output.display());
        }
        Command::Repair {
            shards,
            failed,
            helpers,
        } => {
            repair(&shards, &[failed], RepairMode::Single, helpers.as_deref())?;
        }
        Command::Multirepair {
            shards,
            failed,
            mode,
            helpers,
        } => {
            repair(&shards, &failed, mode.into(), helpers.as_deref())?;
        }
        Command::Verify { shards } => return verify(&shards),
        Command::Bandwidth {
            d,
            m,
            emax,
            mode,
            format: Format::Csv,
        } => {
            let curves = match mode {
                CurveArg::Naive => vec![BandwidthCurve::Naive],
                CurveArg::Joint => vec![BandwidthCurve::Joint],
                CurveArg::Centralized => vec![BandwidthCurve::Centralized],
                CurveArg::All => BandwidthCurve::ALL.to_vec(),
            };
            let mut rows = Vec::new();
            for c in curves {
                rows.extend(bandwidth_table(d, m, emax, c)?);
            }
            print!("{}", bandwidth_csv(&rows));
        }
        Command::Capacity {
            d,
            m,
            nmax,
            nmin,
            prime,
            seed,
            format: Format::Csv,
        } => {
            let nmin = nmin.unwrap_or(d + 1);
            if nmin > nmax {
                bail!("empty range: nmin={nmin} > nmax={nmax}");
            }
            let field = Field::new(prime.unwrap_or_else(|| next_prime(nmax as u64 + 1)))?;
            print!(
                "{}",
                capacity_csv(&capacity_curve(d, m, nmin..=nmax, field, seed)?)
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn load(dir: &Path) -> Result<Cluster> {
    Cluster::load(dir).with_context(|| format!("loading shards from {}", dir.display()))
}

fn encode(input: &Path, n: usize, d: usize, m: usize, prime: u64, out: &Path) -> Result<()> {
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let config = CodeConfig::new(n, d, m, prime)?;
    let cluster = Cluster::from_bytes(config, &bytes)?;
    cluster.save(out)?;
    println!(
        "encoded {} bytes into {} stripes on {n} nodes (alpha={}, beta={}, F={})",
        bytes.len(),
        cluster.stripes(),
        config.alpha(),
        config.beta(),
        config.file_size()
    );
    Ok(())
}

fn repair(dir: &Path, failed: &[usize], mode: RepairMode, helpers: Option<&[usize]>) -> Result<()> {
    let mut cluster = load(dir)?;
    cluster.fail_nodes(failed)?;
    let event = cluster.repair(mode, failed, helpers)?.clone();
    for &f in failed {
        cluster.shard(f)?.write_to_dir(dir)?;
    }
    report(&event);
    Ok(())
}

fn report(event: &RepairEvent) {
    let join = |v: &[usize]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    println!(
        "{} repair of {} from {} over {} stripes: {} symbols",
        event.mode,
        join(&event.failed),
        join(&event.helpers),
        event.stripes,
        event.total()
    );
    for (h, s) in event.helpers.iter().zip(&event.sent) {
        println!("  helper {h}: {s}");
    }
}

fn verify(dir: &Path) -> Result<ExitCode> {
    let cluster = load(dir)?;
    let missing = cluster.failed();
    let bad = cluster.verify()?;
    let n = cluster.config().n();
    if !missing.is_empty() {
        println!("missing shards: {missing:?}");
    }
    if bad.is_empty() {
        println!("{} of {n} shards present and consistent", n - missing.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("inconsistent shards: {bad:?}");
        Ok(ExitCode::FAILURE)
    }
}
