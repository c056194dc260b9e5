//! Per-user outage probability: the chance that the post-combining SINR is at
//! or below the threshold.
//!
//! Monte Carlo splits the samples into fixed-size chunks. Chunk `c` draws from
//! ChaCha8 seeded with the master seed on stream `c`, so the counts, and hence
//! the report, do not depend on how many worker threads run the chunks.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::segment_intersects_cylinder;
use crate::mobility::{sample_human_position, BlockageProbabilityTable};
use crate::network::{LinkId, Network, NodeId};
use crate::noma::{relay_second_phase_sinr, sinr_direct, BlockageState, RelaySpec};
use crate::scenario::BlockageModel;

/// Samples per deterministic random stream.
pub const CHUNK_SAMPLES: u64 = 4096;

/// Largest number of binary link states enumerated per user.
pub const MAX_ENUMERATED_LINKS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Direct,
    #[serde(rename = "coop")]
    Cooperative,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Direct, Mode::Cooperative];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Direct => "direct",
            Mode::Cooperative => "coop",
        })
    }
}

pub fn threshold_linear(threshold_db: f64) -> f64 {
    10f64.powf(threshold_db / 10.0)
}

/// Outage iff the SINR does not exceed the threshold; equality is outage.
pub fn is_outage(sinr_linear: f64, threshold_db: f64) -> bool {
    sinr_linear <= threshold_linear(threshold_db)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    MonteCarlo(BlockageModel),
    /// Product of per-link marginals; ignores correlation between links.
    IndependentApprox,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::MonteCarlo(m) => write!(f, "monte_carlo_{m}"),
            Method::IndependentApprox => f.write_str("independent_approx"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutageRow {
    /// 0-based user index.
    pub user: usize,
    pub mode: Mode,
    pub p_out: f64,
    /// Monte Carlo standard error; `None` for analytic rows.
    pub stderr: Option<f64>,
    pub n_samples: u64,
    pub threshold_db: f64,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutageReport {
    pub method: Method,
    /// Sorted by user, then mode.
    pub rows: Vec<OutageRow>,
}

impl OutageReport {
    pub fn empty(method: Method) -> Self {
        Self { method, rows: Vec::new() }
    }

    pub fn get(&self, user: usize, mode: Mode) -> Option<&OutageRow> {
        self.rows.iter().find(|r| r.user == user && r.mode == mode)
    }

    pub fn p_out(&self, user: usize, mode: Mode) -> Option<f64> {
        self.get(user, mode).map(|r| r.p_out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloConfig {
    pub samples: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    pub model: BlockageModel,
}

/// SINR evaluation for one network with reusable scratch state.
pub struct Evaluator<'a> {
    net: &'a Network,
    relays: Vec<RelaySpec<f64>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(net: &'a Network) -> Self {
        Self {
            net,
            relays: net.relay_specs(),
        }
    }

    pub fn clear_state(&self) -> BlockageState {
        BlockageState::all_clear(self.net.n_ap(), self.net.n_relay(), self.net.n_user())
    }

    pub fn sinr(&self, user: usize, mode: Mode, state: &BlockageState) -> Result<f64> {
        let net = self.net;
        let r = net.users[user].responsivity;
        let noise = net.user_noise[user];
        let first = sinr_direct(user, state, &net.allocation, &net.gains, r, noise)?;
        Ok(match mode {
            Mode::Direct => first,
            Mode::Cooperative => {
                let second = relay_second_phase_sinr(
                    user,
                    state,
                    &net.allocation,
                    &net.gains,
                    &self.relays,
                    &net.user_relays[user],
                    r,
                    noise,
                )?;
                crate::noma::sinr_mrc(first, second)
            }
        })
    }
}

/// SINR of every user with no human in the room.
pub fn unblocked_sinr(net: &Network, mode: Mode) -> Result<Vec<f64>> {
    let ev = Evaluator::new(net);
    let state = ev.clear_state();
    (0..net.n_user()).map(|u| ev.sinr(u, mode, &state)).collect()
}

/// Links whose blockage factors are drawn per sample.
struct Draws {
    /// Served (ap, user) pairs.
    beta: Vec<(usize, usize)>,
    /// Serving (relay, user) pairs.
    gamma: Vec<(usize, usize)>,
    beta_p: Vec<f64>,
    gamma_p: Vec<f64>,
}

impl Draws {
    fn new(net: &Network, table: Option<&BlockageProbabilityTable<f64>>) -> Result<Self> {
        let beta: Vec<(usize, usize)> = net
            .ap_users
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().map(move |&u| (a, u)))
            .collect();
        let gamma: Vec<(usize, usize)> = net
            .relays
            .iter()
            .enumerate()
            .flat_map(|(r, node)| node.serves.iter().map(move |&u| (r, u)))
            .collect();
        let (mut beta_p, mut gamma_p) = (Vec::new(), Vec::new());
        if let Some(t) = table {
            for &(a, u) in &beta {
                beta_p.push(lookup(t, LinkId::Hop(NodeId::Ap(a), NodeId::User(u)))?);
            }
            for &(r, u) in &gamma {
                let id = LinkId::RelayPath {
                    ap: net.paired_ap(r),
                    relay: r,
                    user: u,
                };
                gamma_p.push(lookup(t, id)?);
            }
        }
        Ok(Self {
            beta,
            gamma,
            beta_p,
            gamma_p,
        })
    }
}

fn lookup(t: &BlockageProbabilityTable<f64>, id: LinkId) -> Result<f64> {
    t.get(&id)
        .ok_or_else(|| Error::InvalidArgument(format!("blockage table has no entry for {id}")))
}

fn fill_joint(net: &Network, draws: &Draws, rng: &mut ChaCha8Rng, state: &mut BlockageState, humans: &mut Vec<crate::geometry::Point2<f64>>) {
    humans.clear();
    for _ in 0..net.humans {
        humans.push(sample_human_position(&net.rwp, rng));
    }
    let blocked = |tx: NodeId, rx: NodeId| {
        net.segment(tx, rx)
            .is_some_and(|s| humans.iter().any(|&c| segment_intersects_cylinder(&s, c, &net.cylinder)))
    };
    for &(a, u) in &draws.beta {
        state.set_beta(a, u, !blocked(NodeId::Ap(a), NodeId::User(u)));
    }
    for &(r, u) in &draws.gamma {
        let a = net.paired_ap(r);
        let clear = !blocked(NodeId::Ap(a), NodeId::Relay(r)) && !blocked(NodeId::Relay(r), NodeId::User(u));
        state.set_gamma(r, u, clear);
    }
}

fn fill_independent(draws: &Draws, rng: &mut ChaCha8Rng, state: &mut BlockageState) {
    for (&(a, u), &p) in draws.beta.iter().zip(&draws.beta_p) {
        state.set_beta(a, u, rng.gen::<f64>() >= p);
    }
    for (&(r, u), &p) in draws.gamma.iter().zip(&draws.gamma_p) {
        state.set_gamma(r, u, rng.gen::<f64>() >= p);
    }
}

/// Monte Carlo outage estimate for every user and each mode in `modes`.
///
/// The independent model needs per-link probabilities; when `table` is
/// `None` they are computed from the network.
pub fn outage_monte_carlo(
    net: &Network,
    modes: &[Mode],
    threshold_db: f64,
    cfg: &MonteCarloConfig,
    table: Option<&BlockageProbabilityTable<f64>>,
) -> Result<OutageReport> {
    if cfg.samples == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut modes = modes.to_vec();
    modes.sort_unstable();
    modes.dedup();
    let owned;
    let table = match (cfg.model, table) {
        (BlockageModel::Independent, None) => {
            owned = net.blockage_table()?;
            Some(&owned)
        }
        (BlockageModel::Independent, t) => t,
        (BlockageModel::Joint, _) => None,
    };
    let draws = Draws::new(net, table)?;
    let ev = Evaluator::new(net);
    let n_user = net.n_user();
    let width = n_user * modes.len();
    let n_chunks = cfg.samples.div_ceil(CHUNK_SAMPLES);

    let run_chunk = |c: u64| -> Result<Vec<u64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(c);
        let len = CHUNK_SAMPLES.min(cfg.samples - c * CHUNK_SAMPLES);
        let mut counts = vec![0u64; width];
        let mut state = ev.clear_state();
        let mut humans = Vec::with_capacity(net.humans);
        for _ in 0..len {
            match cfg.model {
                BlockageModel::Joint => fill_joint(net, &draws, &mut rng, &mut state, &mut humans),
                BlockageModel::Independent => fill_independent(&draws, &mut rng, &mut state),
            }
            for u in 0..n_user {
                for (m, &mode) in modes.iter().enumerate() {
                    if is_outage(ev.sinr(u, mode, &state)?, threshold_db) {
                        counts[u * modes.len() + m] += 1;
                    }
                }
            }
        }
        Ok(counts)
    };
    let sum = |a: Result<Vec<u64>>, b: Result<Vec<u64>>| -> Result<Vec<u64>> {
        let (mut a, b) = (a?, b?);
        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        Ok(a)
    };
    let total = || {
        (0..n_chunks)
            .into_par_iter()
            .map(run_chunk)
            .reduce(|| Ok(vec![0u64; width]), sum)
    };
    let counts = if cfg.workers == 0 {
        total()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?
            .install(total)?
    };

    let n = cfg.samples as f64;
    let mut rows = Vec::with_capacity(width);
    for u in 0..n_user {
        for (m, &mode) in modes.iter().enumerate() {
            let p = counts[u * modes.len() + m] as f64 / n;
            rows.push(OutageRow {
                user: u,
                mode,
                p_out: p,
                stderr: Some((p * (1.0 - p) / n).sqrt()),
                n_samples: cfg.samples,
                threshold_db,
                seed: Some(cfg.seed),
            });
        }
    }
    Ok(OutageReport {
        method: Method::MonteCarlo(cfg.model),
        rows,
    })
}

/// A binary blockage factor that matters to one user.
#[derive(Clone, Copy, Debug)]
enum Factor {
    Beta(usize, usize),
    Gamma(usize, usize),
}

fn relevant_factors(net: &Network, user: usize, mode: Mode) -> Vec<Factor> {
    let mut out = Vec::new();
    for g in &net.allocation.groups {
        let Some(idx) = g.sic_index(user) else { continue };
        out.push(Factor::Beta(g.ap, user));
        out.extend(g.decoded_after(idx).map(|(k, _)| Factor::Beta(g.ap, k)));
    }
    if mode == Mode::Cooperative {
        out.extend(net.user_relays[user].iter().map(|&r| Factor::Gamma(r, user)));
    }
    out
}

/// Outage by enumerating every blocked/clear combination of the links a user
/// depends on, weighting each by the product of per-link probabilities.
/// Exact when links are independent, approximate otherwise.
pub fn outage_independent_approx(
    net: &Network,
    table: &BlockageProbabilityTable<f64>,
    modes: &[Mode],
    threshold_db: f64,
) -> Result<OutageReport> {
    let mut modes = modes.to_vec();
    modes.sort_unstable();
    modes.dedup();
    let ev = Evaluator::new(net);
    let mut rows = Vec::new();
    for u in 0..net.n_user() {
        for &mode in &modes {
            let factors = relevant_factors(net, u, mode);
            if factors.len() > MAX_ENUMERATED_LINKS {
                return Err(Error::TooManyLinks {
                    user: NodeId::User(u).to_string(),
                    links: factors.len(),
                    limit: MAX_ENUMERATED_LINKS,
                });
            }
            let probs = factors
                .iter()
                .map(|f| match *f {
                    Factor::Beta(a, k) => lookup(table, LinkId::Hop(NodeId::Ap(a), NodeId::User(k))),
                    Factor::Gamma(r, k) => lookup(
                        table,
                        LinkId::RelayPath {
                            ap: net.paired_ap(r),
                            relay: r,
                            user: k,
                        },
                    ),
                })
                .collect::<Result<Vec<f64>>>()?;
            let mut state = ev.clear_state();
            let mut p_out = 0.0;
            for mask in 0u32..(1u32 << factors.len()) {
                let mut weight = 1.0;
                for (bit, (f, &p)) in factors.iter().zip(&probs).enumerate() {
                    let blocked = mask & (1 << bit) != 0;
                    weight *= if blocked { p } else { 1.0 - p };
                    match *f {
                        Factor::Beta(a, k) => state.set_beta(a, k, !blocked),
                        Factor::Gamma(r, k) => state.set_gamma(r, k, !blocked),
                    }
                }
                if weight > 0.0 && is_outage(ev.sinr(u, mode, &state)?, threshold_db) {
                    p_out += weight;
                }
            }
            rows.push(OutageRow {
                user: u,
                mode,
                p_out: p_out.clamp(0.0, 1.0),
                stderr: None,
                n_samples: 0,
                threshold_db,
                seed: None,
            });
        }
    }
    Ok(OutageReport {
        method: Method::IndependentApprox,
        rows,
    })
}
