//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::channel::ChannelModel;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::network::{LinkId, Network, NodeId};
use crate::outage::{outage_monte_carlo, Mode, MonteCarloConfig};
use crate::results::{outage_table, Cell, Format, Table};
use crate::scenario::{default_scenario, load_scenario, BlockageModel, Scenario};

#[derive(Debug, Parser)]
#[command(name = "owcsim", version, about = "Outage of beam-steered indoor optical links under human blockage")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Direct,
    Coop,
    Both,
}

impl ModeArg {
    fn modes(self) -> Vec<Mode> {
        match self {
            ModeArg::Direct => vec![Mode::Direct],
            ModeArg::Coop => vec![Mode::Cooperative],
            ModeArg::Both => Mode::BOTH.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Joint,
    Independent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo outage probability per user.
    Simulate {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        mode: ModeArg,
        /// Defaults to the scenario's sampler setting.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 picks one per core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, value_enum)]
        blockage_model: Option<ModelArg>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Blockage probability of every hop and relayed path.
    Blockage {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Channel gains of served links, or one link's impulse response.
    Channel {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Transmitter, e.g. AP1 or R3.
        #[arg(long, requires = "rx")]
        tx: Option<String>,
        /// Receiver, e.g. U2 or R3.
        #[arg(long, requires = "tx")]
        rx: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Human position density sampled on an N x N floor grid.
    Pdf {
        #[arg(long, default_value_t = 41)]
        grid: usize,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn scenario(path: &Option<PathBuf>) -> Result<Scenario> {
    match path {
        Some(p) => load_scenario(p),
        None => Ok(default_scenario()),
    }
}

/// Parses `AP1`, `R2`, `U3` (case-insensitive, 1-based).
pub fn parse_node(s: &str) -> Result<NodeId> {
    let up = s.trim().to_ascii_uppercase();
    let (kind, num) = if let Some(n) = up.strip_prefix("AP") {
        (0, n)
    } else if let Some(n) = up.strip_prefix('R') {
        (1, n)
    } else if let Some(n) = up.strip_prefix('U') {
        (2, n)
    } else {
        return Err(Error::InvalidArgument(format!("bad node id `{s}`; expected APn, Rn or Un")));
    };
    let i: usize = num
        .parse()
        .ok()
        .filter(|&i| i >= 1)
        .ok_or_else(|| Error::InvalidArgument(format!("bad node id `{s}`; numbering starts at 1")))?;
    Ok(match kind {
        0 => NodeId::Ap(i - 1),
        1 => NodeId::Relay(i - 1),
        _ => NodeId::User(i - 1),
    })
}

fn emit(table: &Table, out: &Option<PathBuf>, format: Format, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => table.save(p, format),
        None => table.write(stdout, format),
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Simulate {
            scenario: path,
            mode,
            samples,
            seed,
            out,
            workers,
            blockage_model,
            format,
        } => {
            let s = scenario(&path)?;
            let net = Network::build(&s)?;
            let cfg = MonteCarloConfig {
                samples: samples.unwrap_or(s.sampler.samples),
                seed: seed.unwrap_or(s.sampler.seed),
                workers,
                model: match blockage_model {
                    Some(ModelArg::Joint) => BlockageModel::Joint,
                    Some(ModelArg::Independent) => BlockageModel::Independent,
                    None => s.sampler.blockage_model,
                },
            };
            let report = outage_monte_carlo(&net, &mode.modes(), s.threshold_db, &cfg, None)?;
            let format = match format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Jsonl => Format::Jsonl,
            };
            emit(&outage_table(&report), &out, format, stdout)
        }
        Command::Blockage { scenario: path, out } => {
            let s = scenario(&path)?;
            let net = Network::build(&s)?;
            let table = net.blockage_table()?;
            let mut t = Table::new(&["link_id", "tx", "rx", "probability", "method"]);
            for (id, p) in &table.entries {
                let (tx, rx) = id.endpoints();
                let method = match id {
                    LinkId::Hop(..) => "quadrature",
                    LinkId::RelayPath { .. } => "quadrature_union",
                };
                t.push(vec![
                    Cell::Text(id.to_string()),
                    Cell::Text(tx.to_string()),
                    Cell::Text(rx.to_string()),
                    Cell::Float(*p),
                    Cell::Text(method.into()),
                ]);
            }
            emit(&t, &out, Format::Csv, stdout)
        }
        Command::Channel {
            scenario: path,
            tx,
            rx,
            out,
        } => {
            let s = scenario(&path)?;
            let ch = &s.channel;
            let model = ChannelModel::new(s.room, ch.first_resolution, ch.second_resolution, ch.bin_duration)?;
            let net = Network::build_with(&s, &model)?;
            let mut t = Table::new(&["tx_id", "rx_id", "H", "los_gain", "reflected_gain"]);
            let row = |tx: NodeId, rx: NodeId, split: crate::channel::GainSplit<f64>| {
                vec![
                    Cell::Text(tx.to_string()),
                    Cell::Text(rx.to_string()),
                    Cell::Float(split.total()),
                    Cell::Float(split.los),
                    Cell::Float(split.reflected),
                ]
            };
            match (tx, rx) {
                (Some(tx), Some(rx)) => {
                    let (tx, rx) = (parse_node(&tx)?, parse_node(&rx)?);
                    let (t_spec, r_spec) = net.transceivers(tx, rx)?;
                    t.push(row(tx, rx, model.gain_split(&t_spec, &r_spec, ch.max_bounces)?));
                    let cir = model.impulse_response(&t_spec, &r_spec, ch.max_bounces, None)?;
                    let mut bins = Table::new(&["bin_index", "time_s", "gain"]);
                    for (k, time, g) in cir.nonzero_bins() {
                        bins.push(vec![Cell::Int(k as u64), Cell::Float(time), Cell::Float(g)]);
                    }
                    let mut text = t.to_string(Format::Csv)?;
                    text.push('\n');
                    text.push_str(&bins.to_string(Format::Csv)?);
                    match out {
                        Some(p) => std::fs::write(p, text)?,
                        None => stdout.write_all(text.as_bytes())?,
                    }
                    Ok(())
                }
                _ => {
                    for g in net.link_gains(&model, ch.max_bounces)? {
                        t.push(row(g.tx, g.rx, g.split));
                    }
                    emit(&t, &out, Format::Csv, stdout)
                }
            }
        }
        Command::Pdf { grid, scenario: path, out } => {
            if grid < 2 {
                return Err(Error::InvalidArgument(format!("grid must be at least 2, got {grid}")));
            }
            let s = scenario(&path)?;
            let dist = crate::mobility::RwpDistribution::new(s.room.width, s.room.length)?;
            let mut t = Table::new(&["x", "y", "density"]);
            let step = |extent: f64, i: usize| extent * i as f64 / (grid - 1) as f64;
            for i in 0..grid {
                for j in 0..grid {
                    let p = Point2::new(step(s.room.width, i), step(s.room.length, j));
                    t.push(vec![Cell::Float(p.x), Cell::Float(p.y), Cell::Float(dist.pdf(p))]);
                }
            }
            emit(&t, &out, Format::Csv, stdout)
        }
    }
}
