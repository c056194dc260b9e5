//! Acceptance checks, one PASS/FAIL line each. Exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use owcsim::channel::{dc_gain, narrow_beam_los_gain, ChannelModel, ReceiverSpec, TransmitterSpec};
use owcsim::geometry::{blocked_region, segment_intersects_cylinder, CylinderSpec, Point2, Point3, Segment3, SlicedRegion};
use owcsim::mobility::{sample_human_position, RwpDistribution};
use owcsim::network::{LinkId, Network, NodeId};
use owcsim::noma::{relay_second_phase_sinr, sinr_direct, SinrBreakdown};
use owcsim::outage::{outage_independent_approx, outage_monte_carlo, Evaluator, Mode, MonteCarloConfig};
use owcsim::scenario::{default_scenario, ApConfig, BlockageModel, UserConfig};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn p3(x: f64, y: f64, z: f64) -> Point3<f64> {
    Point3::new(x, y, z)
}

fn criterion_1() -> Outcome {
    let d = RwpDistribution::<f64>::new(4.0, 8.0).unwrap();
    let total = d.probability(&d.footprint(), 1e-12).unwrap();
    let centre = d.pdf(Point2::new(2.0, 4.0));
    let pass = (total - 1.0).abs() <= 1e-9 && (centre - 0.0703125).abs() <= 1e-12;
    outcome(pass, format!("integral {total:.15}, centre density {centre:.15}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let cyl = CylinderSpec::default();
    let floor = owcsim::geometry::Rect2::from_extent(4.0, 8.0);
    let point = |rng: &mut ChaCha8Rng| p3(rng.gen_range(0.0..4.0), rng.gen_range(0.0..8.0), rng.gen_range(0.0..3.0));
    let (mut mismatches, mut blocked, mut n) = (0, 0, 0);
    while n < 10_000 {
        let (a, b) = (point(&mut rng), point(&mut rng));
        let Ok(link) = Segment3::new(a, b) else { continue };
        let c = Point2::new(rng.gen_range(0.0..4.0), rng.gen_range(0.0..8.0));
        let region = blocked_region(&link, &cyl, floor);
        let hit = segment_intersects_cylinder(&link, c, &cyl);
        blocked += hit as usize;
        mismatches += (region.contains(c) != hit) as usize;
        n += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 10.0,
        format!("{mismatches} mismatches over {n} links ({blocked} blocked), {secs:.3} s"),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let net = Network::build(&default_scenario()).unwrap();
    let table = net.blockage_table().unwrap();
    let quad_secs = start.elapsed().as_secs_f64();
    let hops = net.all_hops();
    let n = 1_000_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut hits = vec![0u64; hops.len()];
    for _ in 0..n {
        let c = sample_human_position(&net.rwp, &mut rng);
        for (k, (_, seg)) in hops.iter().enumerate() {
            hits[k] += segment_intersects_cylinder(seg, c, &net.cylinder) as u64;
        }
    }
    let mut worst = (0.0f64, String::new());
    let mut outside = Vec::new();
    for ((id, _), &h) in hops.iter().zip(&hits) {
        let q = table.get(id).unwrap();
        let p = h as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let z = if se > 0.0 { (p - q).abs() / se } else if p == q { 0.0 } else { f64::INFINITY };
        if z > worst.0 {
            worst = (z, id.to_string());
        }
        if z > 3.0 {
            outside.push(format!("{id} (z = {z:.2})"));
        }
    }
    let kinds = |f: fn(&LinkId) -> bool| hops.iter().filter(|(id, _)| f(id)).count();
    let counts = (
        kinds(|id| matches!(id, LinkId::Hop(NodeId::Ap(_), NodeId::User(_)))),
        kinds(|id| matches!(id, LinkId::Hop(NodeId::Ap(_), NodeId::Relay(_)))),
        kinds(|id| matches!(id, LinkId::Hop(NodeId::Relay(_), NodeId::User(_)))),
    );
    let mut detail = format!(
        "{} links ({} AP-user, {} AP-relay, {} relay-user), worst |z| = {:.2} on {}, quadrature table {:.3} s, total {:.1} s",
        hops.len(),
        counts.0,
        counts.1,
        counts.2,
        worst.0,
        worst.1,
        quad_secs,
        start.elapsed().as_secs_f64()
    );
    if !outside.is_empty() {
        detail.push_str(&format!("; beyond 3 SE: {}", outside.join(", ")));
    }
    outcome(outside.is_empty() && counts == (48, 64, 48) && quad_secs < 60.0, detail)
}

fn criterion_4() -> Outcome {
    let mut s = default_scenario();
    s.aps = vec![ApConfig::at(p3(1.0, 1.0, 3.0))];
    s.relays.clear();
    s.users = vec![UserConfig::at(p3(1.0, 1.0, 1.0))];
    let net = Network::build(&s).unwrap();
    let unblocked = owcsim::outage::unblocked_sinr(&net, Mode::Direct).unwrap()[0];
    let table = net.blockage_table().unwrap();
    let q = table.get(&LinkId::Hop(NodeId::Ap(0), NodeId::User(0))).unwrap();
    let cfg = MonteCarloConfig {
        samples: 1_000_000,
        seed: SEED,
        workers: 0,
        model: BlockageModel::Joint,
    };
    let r = outage_monte_carlo(&net, &[Mode::Direct], s.threshold_db, &cfg, None).unwrap();
    let row = r.get(0, Mode::Direct).unwrap();
    let se = row.stderr.unwrap();
    let pass = unblocked > owcsim::outage::threshold_linear(s.threshold_db)
        && (row.p_out - q).abs() <= 3.0 * se
        && (q / 0.00652 - 1.0).abs() <= 0.03;
    outcome(
        pass,
        format!(
            "MC {:.6} ± {:.6}, quadrature {:.6} (midpoint estimate 0.00652), unblocked SINR {:.1} dB",
            row.p_out,
            se,
            q,
            10.0 * unblocked.log10()
        ),
    )
}

fn geo_mean(v: &[f64]) -> f64 {
    (v.iter().map(|x| x.ln()).sum::<f64>() / v.len() as f64).exp()
}

fn criterion_5() -> Outcome {
    let s = default_scenario();
    let net = Network::build(&s).unwrap();
    let table = net.blockage_table().unwrap();
    let th = s.threshold_db;
    let mc = |model| {
        let cfg = MonteCarloConfig {
            samples: 1_000_000,
            seed: SEED,
            workers: 0,
            model,
        };
        outage_monte_carlo(&net, &Mode::BOTH, th, &cfg, Some(&table)).unwrap()
    };
    let ind = mc(BlockageModel::Independent);
    let exact = outage_independent_approx(&net, &table, &Mode::BOTH, th).unwrap();
    let joint = mc(BlockageModel::Joint);
    let n_user = net.n_user();

    let strictly_lower = (0..n_user).all(|u| ind.p_out(u, Mode::Cooperative).unwrap() < ind.p_out(u, Mode::Direct).unwrap());
    let ratio = |r: &owcsim::outage::OutageReport, u| r.p_out(u, Mode::Direct).unwrap() / r.p_out(u, Mode::Cooperative).unwrap();
    let exact_ratios: Vec<f64> = (0..n_user).map(|u| ratio(&exact, u)).collect();
    let mc_ratios: Vec<f64> = (0..n_user).map(|u| ratio(&ind, u)).collect();
    let joint_ratios: Vec<f64> = (0..n_user).map(|u| ratio(&joint, u)).collect();
    let gm = geo_mean(&exact_ratios);
    let best = (0..n_user).max_by(|&a, &b| exact_ratios[a].total_cmp(&exact_ratios[b])).unwrap();
    // MC and the exact enumeration describe the same independent-link law
    let consistent = (0..n_user).all(|u| {
        Mode::BOTH.iter().all(|&m| {
            let row = ind.get(u, m).unwrap();
            let p = exact.p_out(u, m).unwrap();
            let se = (p * (1.0 - p) / row.n_samples as f64).sqrt();
            (row.p_out - p).abs() <= 4.0 * se + 1.0 / row.n_samples as f64
        })
    });
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ");
    let per_user: Vec<String> = (0..n_user)
        .map(|u| {
            format!(
                "U{}: direct {:.3e} coop {:.3e}",
                u + 1,
                ind.p_out(u, Mode::Direct).unwrap(),
                ind.p_out(u, Mode::Cooperative).unwrap()
            )
        })
        .collect();
    let pass = strictly_lower && gm >= 10.0 && best == 4 && consistent;
    outcome(
        pass,
        format!(
            "independent-link blockage, n = 1e6: {}; (a) coop < direct for all users: {strictly_lower}; \
             (b) geometric-mean improvement {gm:.1}x exact, {:.1}x MC (exact ratios {}; MC ratios {}); \
             (c) largest improvement U{} ({:.0}x); MC vs enumeration consistent: {consistent}. \
             Diagnostic, single-human joint sampling ratios: {} (geometric mean {:.2}x)",
            per_user.join(", "),
            geo_mean(&mc_ratios),
            fmt(&exact_ratios),
            fmt(&mc_ratios),
            best + 1,
            exact_ratios[best],
            fmt(&joint_ratios),
            geo_mean(&joint_ratios)
        ),
    )
}

fn criterion_6() -> Outcome {
    let net = Network::build(&default_scenario()).unwrap();
    let ev = Evaluator::new(&net);
    let relays = net.relay_specs();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut exact, mut dominant, mut n) = (0, 0, 0);
    for _ in 0..1000 {
        let mut state = ev.clear_state();
        for a in 0..net.n_ap() {
            for u in 0..net.n_user() {
                state.set_beta(a, u, rng.gen_bool(0.7));
            }
        }
        for r in 0..net.n_relay() {
            for u in 0..net.n_user() {
                state.set_gamma(r, u, rng.gen_bool(0.7));
            }
        }
        let u = rng.gen_range(0..net.n_user());
        let (resp, noise) = (net.users[u].responsivity, net.user_noise[u]);
        let first = sinr_direct(u, &state, &net.allocation, &net.gains, resp, noise).unwrap();
        let second =
            relay_second_phase_sinr(u, &state, &net.allocation, &net.gains, &relays, &net.user_relays[u], resp, noise).unwrap();
        let b = SinrBreakdown::new(u, first, second);
        exact += (b.mrc.to_bits() == (first + second).to_bits()) as usize;
        dominant += (b.mrc >= first.max(second)) as usize;
        n += 1;
    }
    outcome(exact == n && dominant == n, format!("{exact}/{n} bit-exact sums, {dominant}/{n} dominate both phases"))
}

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_owcsim");
    let mut files = Vec::new();
    for workers in [1, 8] {
        for run in 0..2 {
            let path = dir.path().join(format!("w{workers}_{run}.csv"));
            let status = Command::new(bin)
                .args(["simulate", "--samples", "100000", "--seed", "99", "--workers", &workers.to_string(), "--out"])
                .arg(&path)
                .status()
                .unwrap();
            assert!(status.success());
            files.push(std::fs::read(&path).unwrap());
        }
    }
    let same = files.windows(2).all(|w| w[0] == w[1]);
    outcome(same, format!("4 runs (1 and 8 workers, twice each), {} bytes each, identical: {same}", files[0].len()))
}

fn criterion_8() -> Outcome {
    let at = |d: f64| {
        let rx = ReceiverSpec::upward(p3(1.0, 1.0, 5.0 - d));
        let tx = TransmitterSpec::ceiling(p3(1.0, 1.0, 5.0)).aimed_at(rx.position);
        narrow_beam_los_gain(&tx, &rx).unwrap()
    };
    let (g2, g4) = (at(2.0), at(4.0));
    let model = ChannelModel::new(owcsim::channel::RoomModel::default(), 0.05, 0.20, 1e-11).unwrap();
    let rx = ReceiverSpec::upward(p3(1.0, 1.0, 1.0));
    let tx = TransmitterSpec::ceiling(p3(1.0, 1.0, 3.0)).aimed_at(rx.position);
    let cir = model.impulse_response(&tx, &rx, 0, None).unwrap();
    let bin = cir.nonzero_bins().next().map(|b| b.0);

    // every served link of the reference scenario plus a few beams that overfill the detector
    let net = Network::build_with(&default_scenario(), &model).unwrap();
    let mut links: Vec<(TransmitterSpec<f64>, ReceiverSpec<f64>)> = Vec::new();
    for (a, users) in net.ap_users.iter().enumerate() {
        for &u in users {
            links.push(net.transceivers(NodeId::Ap(a), NodeId::User(u)).unwrap());
        }
    }
    for (r, node) in net.relays.iter().enumerate() {
        for &u in &node.serves {
            links.push(net.transceivers(NodeId::Relay(r), NodeId::User(u)).unwrap());
        }
    }
    for (x, y, z) in [(2.2, 2.4, 0.2), (1.8, 2.2, 0.1), (1.3, 0.4, 0.0)] {
        let rx = ReceiverSpec::upward(p3(x, y, z));
        links.push((TransmitterSpec::ceiling(p3(1.0, 1.0, 3.0)).aimed_at(rx.position), rx));
    }
    let mut monotone = 0;
    let mut grows = 0;
    for (t, r) in &links {
        let g: Vec<f64> = (0..=2).map(|b| dc_gain(&model.impulse_response(t, r, b, None).unwrap())).collect();
        monotone += (g[1] >= g[0] && g[2] >= g[1]) as usize;
        grows += (g[2] > g[0]) as usize;
    }
    let pass = g2 == 1.0 && (g4 - 0.45112).abs() <= 1e-4 && bin == Some(667) && monotone == links.len();
    outcome(
        pass,
        format!(
            "LOS gain 2 m = {g2}, 4 m = {g4:.6}; bin index at 2 m = {bin:?}; dc gain non-decreasing with bounce order on {monotone}/{} links ({grows} gain reflected power)",
            links.len()
        ),
    )
}

fn criterion_9() -> Outcome {
    let d = RwpDistribution::new(4.0, 8.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let n = 1_000_000usize;
    let pts: Vec<Point2<f64>> = (0..n).map(|_| sample_human_position(&d, &mut rng)).collect();
    let stats = |v: &dyn Fn(&Point2<f64>) -> f64, target: f64| {
        let mean = pts.iter().map(v).sum::<f64>() / n as f64;
        let m2 = pts.iter().map(|p| (v(p) - mean).powi(2)).sum::<f64>() / n as f64;
        let m4 = pts.iter().map(|p| (v(p) - mean).powi(4)).sum::<f64>() / n as f64;
        let var = m2 * n as f64 / (n - 1) as f64;
        let se = ((m4 - m2 * m2) / n as f64).sqrt();
        (mean, var, se, (var - target).abs() <= 3.0 * se)
    };
    let (mx, vx, sx, okx) = stats(&|p| p.x, 0.8);
    let (my, vy, sy, oky) = stats(&|p| p.y, 3.2);
    outcome(
        okx && oky,
        format!("Var(x) = {vx:.5} ± {sx:.5} (target 0.8), Var(y) = {vy:.5} ± {sy:.5} (target 3.2); means ({mx:.4}, {my:.4})"),
    )
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Outcome); 9] = [
        ("RWP density normalisation and centre value", criterion_1),
        ("stadium membership vs segment-cylinder predicate", criterion_2),
        ("blockage quadrature vs Monte Carlo", criterion_3),
        ("single-link outage equals blockage probability", criterion_4),
        ("relay cooperation improvement", criterion_5),
        ("MRC exactness", criterion_6),
        ("simulate determinism across worker counts", criterion_7),
        ("channel sanity", criterion_8),
        ("sampler variance", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        failed += (!o.pass) as usize;
        println!(
            "criterion {}: {} [{name}] {} ({:.1} s)",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
