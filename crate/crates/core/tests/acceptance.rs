//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::thread;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsc_lab::agent::{td_targets, QNetwork};
use tsc_lab::baselines::{Controller, Sotl1, Sotl2, SotlParams};
use tsc_lab::env::{observe, ActionMode, DecisionProcess, Env, StateVariant, Transition};
use tsc_lab::harness::{run_episode, run_training, ExperimentConfig, TrainingOutcome};
use tsc_lab::sim::SimState;
use tsc_lab::traffic::{generate_flow, FlowDataset, FlowProfile, IntersectionSpec, Lane, Vehicle};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn fixture_config() -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy_two_phase.toml");
    ExperimentConfig::load(&path).expect("toy fixture loads")
}

// 1: conservation and determinism

fn random_spec(rng: &mut ChaCha8Rng) -> IntersectionSpec {
    let base = if rng.gen_bool(0.5) {
        IntersectionSpec::two_phase()
    } else {
        IntersectionSpec::default_eight()
    };
    let lanes = base
        .lanes
        .iter()
        .map(|_| Lane {
            length_m: rng.gen_range(60.0..400.0),
            vmax_ms: rng.gen_range(6.0..16.0),
        })
        .collect();
    let phases = base
        .phases
        .iter()
        .map(|p| p.green_movements.clone())
        .collect();
    IntersectionSpec::new(
        lanes,
        base.movements.clone(),
        base.conflicts.clone(),
        Some(phases),
        rng.gen_range(1..=6),
    )
    .expect("random spec is valid")
}

fn random_flow(rng: &mut ChaCha8Rng, lanes: usize, duration: u32) -> FlowDataset {
    let profile = if rng.gen_bool(0.5) {
        FlowProfile::Uniform {
            rate_per_lane: rng.gen_range(0.005..0.4),
            lanes,
        }
    } else {
        FlowProfile::Clustered {
            cluster_size: rng.gen_range(1..12),
            inter_cluster_gap: rng.gen_range(5..60),
            within_gap: rng.gen_range(1..4),
            lane_weights: (0..lanes).map(|_| rng.gen_range(0.1..5.0)).collect(),
        }
    };
    generate_flow(&profile, rng.gen(), duration).expect("flow generates")
}

/// Per-tick state hashes, or the tick at which conservation broke.
fn run_fingerprint(
    spec: &Arc<IntersectionSpec>,
    flow: &Arc<FlowDataset>,
    commands: &[Option<usize>],
) -> Result<Vec<u64>, u32> {
    let mut sim = SimState::new(spec.clone(), flow.clone());
    let mut prints = Vec::with_capacity(commands.len());
    for cmd in commands {
        if let Some(phase) = *cmd {
            if !sim.is_yellow() {
                sim.command_signal(phase).expect("valid phase");
            }
        }
        sim.tick();
        if sim.spawned() != sim.on_network() + sim.in_backlog() + sim.completed().len() {
            return Err(sim.clock());
        }
        let mut h: u64 = 0xcbf29ce484222325;
        let mut mix = |x: u64| h = (h ^ x).wrapping_mul(0x100000001b3);
        for r in sim.trajectory() {
            mix(r.vehicle as u64);
            mix(r.lane as u64);
            mix(r.position.to_bits());
            mix(r.speed.to_bits());
        }
        mix(sim.completed().len() as u64);
        mix(sim.in_backlog() as u64);
        mix(sim.signal().current_phase as u64);
        prints.push(h);
    }
    Ok(prints)
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let ticks = 3600;
    for case in 0..50 {
        let spec = Arc::new(random_spec(&mut rng));
        let flow = Arc::new(random_flow(&mut rng, spec.num_lanes(), ticks));
        let p = rng.gen_range(0.01..0.5);
        let commands: Vec<Option<usize>> = (0..ticks)
            .map(|_| rng.gen_bool(p).then(|| rng.gen_range(0..spec.num_phases())))
            .collect();
        match (
            run_fingerprint(&spec, &flow, &commands),
            run_fingerprint(&spec, &flow, &commands),
        ) {
            (Err(t), _) | (_, Err(t)) => {
                return verdict(
                    false,
                    format!("case {case}: conservation broke at tick {t}"),
                )
            }
            (Ok(a), Ok(b)) if a != b => {
                return verdict(false, format!("case {case}: reruns diverged"))
            }
            _ => {}
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        secs < 30.0,
        format!("50 triples x 3600 ticks conserved every tick and bit-identical on rerun; {secs:.1}s (limit 30s)"),
    )
}

// 2: SMDP transition accounting

/// Cyclic actions: keep until the phase has had 10 green seconds, then advance.
fn scripted_action(env: &Env) -> usize {
    usize::from(!env.sim().is_yellow() && env.sim().signal().time_in_phase >= 10)
}

struct Episode {
    transitions: Vec<Transition>,
    switches: usize,
}

fn scripted_episode(process: DecisionProcess) -> Episode {
    let spec = Arc::new(IntersectionSpec::two_phase());
    let flow =
        Arc::new(generate_flow(&"uniform:rate=0.1,lanes=4".parse().unwrap(), 3, 3600).unwrap());
    let mut env = Env::new(
        spec,
        flow,
        StateVariant::Wad,
        ActionMode::Cyclic,
        process,
        0.99,
    )
    .unwrap();
    let mut transitions = Vec::new();
    let mut switches = 0;
    while !env.is_terminal() {
        let action = scripted_action(&env);
        switches += action;
        transitions.push(env.step(action).unwrap());
    }
    Episode {
        transitions,
        switches,
    }
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let mdp = scripted_episode(DecisionProcess::Mdp);
    let smdp = scripted_episode(DecisionProcess::Smdp);
    let (m, s) = (mdp.transitions.len(), smdp.transitions.len());
    let full = smdp.transitions.iter().filter(|t| t.duration == 6).count();
    let cut = smdp.switches - full;
    // a switch the horizon cuts short folds fewer than 5 ticks
    let expected = m - 5 * full - cut_fold(&smdp);
    let exact = s == expected && mdp.switches == smdp.switches;
    let reduction = 1.0 - s as f64 / m as f64;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        exact && (0.25..=0.45).contains(&reduction) && secs < 10.0,
        format!(
            "MDP {m} transitions, SMDP {s}, switches {} ({cut} cut by the horizon); \
             MDP - 5*full switches - partial = {}; reduction {:.1}% (band 25-45%); {secs:.2}s",
            smdp.switches,
            expected,
            100.0 * reduction
        ),
    )
}

fn cut_fold(ep: &Episode) -> usize {
    ep.transitions
        .iter()
        .filter(|t| t.duration > 1 && t.duration < 6)
        .map(|t| t.duration as usize - 1)
        .sum()
}

// 3: SMDP reward aggregation

fn criterion_3() -> Verdict {
    // two vehicles queue on lane 2, which is red in phase 0 and in phase 6
    let spec = Arc::new(IntersectionSpec::default_eight());
    let flow = Arc::new(
        FlowDataset::new(
            vec![Vehicle::new(0, 0, 2), Vehicle::new(1, 1, 2)],
            300,
            "pair",
        )
        .unwrap(),
    );
    let gamma = 0.99;
    let mut env = Env::new(
        spec,
        flow,
        StateVariant::Wad,
        ActionMode::Acyclic,
        DecisionProcess::Smdp,
        gamma,
    )
    .unwrap();
    let mut last = None;
    for _ in 0..60 {
        last = Some(env.step(0).unwrap());
    }
    let keep = last.unwrap();
    if (keep.reward - gamma * -2.0).abs() > 1e-12 {
        return verdict(
            false,
            format!("queue not settled at 2: keep reward {}", keep.reward),
        );
    }
    let before = env.tick_reward_sum();
    let t = env.step(6).unwrap();
    let ticks_sum = env.tick_reward_sum() - before;
    let oracle: f64 = -2.0 * (1..=6).map(|k| gamma.powi(k)).sum::<f64>();
    let err = (t.reward - oracle).abs();
    verdict(
        err < 1e-6 && t.duration == 6 && ticks_sum == -12.0,
        format!(
            "switch reward {:.9} vs -2*sum(0.99^t, t=1..6) = {oracle:.9}, |err| {err:.1e} (tol 1e-6), duration {}",
            t.reward, t.duration
        ),
    )
}

// 4: SOTL-2.0 oracle and two-phase equivalence

/// Re-integrates ρ from the full trace at every tick.
#[allow(clippy::needless_range_loop)]
fn sotl2_oracle(
    lanes: &[Vec<bool>],
    params: SotlParams,
    counts: &[Vec<u32>],
    near: &[u32],
) -> Vec<(usize, Vec<u64>)> {
    let nl = lanes[0].len();
    let mut reset_at = vec![0usize; nl];
    let mut phase_at: Vec<usize> = Vec::new();
    let (mut current, mut green_since) = (0, 0);
    let mut out = Vec::new();
    for t in 0..counts.len() {
        phase_at.push(current);
        let rho: Vec<u64> = (0..nl)
            .map(|j| {
                (reset_at[j]..=t)
                    .filter(|&s| !lanes[phase_at[s]][j])
                    .map(|s| counts[s][j] as u64)
                    .sum()
            })
            .collect();
        let kappa: Vec<u64> = lanes
            .iter()
            .map(|l| (0..nl).filter(|&j| l[j]).map(|j| rho[j]).sum())
            .collect();
        let gate = near[t] == 0 || near[t] >= params.mu;
        let max = *kappa.iter().max().unwrap();
        if (t + 1 - green_since) as u32 > params.min_green && gate && max as f64 > params.theta {
            let best = kappa.iter().position(|&k| k == max).unwrap();
            for j in 0..nl {
                if lanes[best][j] {
                    reset_at[j] = t + 1;
                }
            }
            if best != current {
                green_since = t + 1;
            }
            current = best;
        }
        out.push((current, kappa));
    }
    out
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for trace in 0..100 {
        let nl = rng.gen_range(2..=8);
        let np = rng.gen_range(2..=6);
        let lanes: Vec<Vec<bool>> = (0..np)
            .map(|k| {
                let mut l: Vec<bool> = (0..nl).map(|_| rng.gen_bool(0.4)).collect();
                l[k % nl] = true;
                l
            })
            .collect();
        let params = SotlParams {
            theta: rng.gen_range(1..80) as f64,
            mu: rng.gen_range(0..5),
            min_green: rng.gen_range(1..10),
            ..SotlParams::default()
        };
        let counts: Vec<Vec<u32>> = (0..200)
            .map(|_| (0..nl).map(|_| rng.gen_range(0..6)).collect())
            .collect();
        let near: Vec<u32> = (0..200).map(|_| rng.gen_range(0..6)).collect();
        let oracle = sotl2_oracle(&lanes, params, &counts, &near);
        let mut ctrl = Sotl2::new(params, lanes.clone());
        let mut current = 0;
        for t in 0..200 {
            current = ctrl.step(&counts[t], near[t], current);
            if current != oracle[t].0 || ctrl.kappa() != oracle[t].1.as_slice() {
                return verdict(
                    false,
                    format!("trace {trace} diverges from the oracle at tick {t}"),
                );
            }
        }
    }

    // closed loop on the toy fixture; the platoon gate is inert at mu = 0
    let config = fixture_config();
    let spec = Arc::new(config.spec().unwrap());
    let flow = Arc::new(config.load_flows().unwrap().remove(0));
    let params = SotlParams {
        mu: 0,
        ..config.sotl
    };
    let switch_ticks = |ctrl: &mut dyn Controller| {
        let mut ticks = Vec::new();
        let mut phase = 0;
        run_episode(ctrl, spec.clone(), flow.clone(), |sim| {
            let p = if sim.is_yellow() {
                sim.signal().pending_phase
            } else {
                sim.signal().current_phase
            };
            if p != phase {
                ticks.push(sim.clock());
                phase = p;
            }
            Ok(())
        })
        .unwrap();
        ticks
    };
    let a = switch_ticks(&mut Sotl1::for_spec(params, &spec));
    let b = switch_ticks(&mut Sotl2::for_spec(params, &spec));
    verdict(
        a == b && !a.is_empty(),
        format!(
            "100 random 200-tick traces match the re-integration oracle exactly; \
             two-phase fixture: SOTL-1.0 and SOTL-2.0 both switch {} times at identical ticks: {}",
            a.len(),
            a == b
        ),
    )
}

// 5: gradient check

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let input = rng.gen_range(1..=6);
        let mut sizes = vec![input];
        for _ in 0..rng.gen_range(1..=2) {
            sizes.push(rng.gen_range(2..=8));
        }
        let k = rng.gen_range(2..=4);
        sizes.push(k);
        let online = QNetwork::seeded(&sizes, &mut rng);
        let target = QNetwork::seeded(&sizes, &mut rng);
        let batch: Vec<Transition> = (0..rng.gen_range(1..=8))
            .map(|_| Transition {
                state: (0..input).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                action: rng.gen_range(0..k),
                reward: rng.gen_range(-5.0..0.0),
                next_state: (0..input).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                duration: if rng.gen_bool(0.3) { 6 } else { 1 },
                terminal: rng.gen_bool(0.2),
            })
            .collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        let y = td_targets(&target, &refs, 0.99).unwrap();
        let states: Vec<&[f64]> = batch.iter().map(|t| t.state.as_slice()).collect();
        let actions: Vec<usize> = batch.iter().map(|t| t.action).collect();
        let (_, analytic) = online.loss_and_gradient(&states, &actions, &y).unwrap();
        let loss = |net: &QNetwork| {
            batch
                .iter()
                .zip(&y)
                .map(|(t, yi)| (yi - net.forward(&t.state).unwrap()[t.action]).powi(2))
                .sum::<f64>()
                / batch.len() as f64
        };
        let h = 1e-6;
        let numeric: Vec<f64> = (0..analytic.len())
            .map(|i| {
                let mut plus = online.clone();
                plus.params_mut()[i] += h;
                let mut minus = online.clone();
                minus.params_mut()[i] -= h;
                (loss(&plus) - loss(&minus)) / (2.0 * h)
            })
            .collect();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, n)| a - n).collect();
        let denom = norm(&analytic) + norm(&numeric);
        let rel = if denom == 0.0 {
            0.0
        } else {
            norm(&diff) / denom
        };
        worst = worst.max(rel);
    }
    verdict(
        worst < 1e-4,
        format!("20 random networks, worst relative error {worst:.2e} (tol 1e-4)"),
    )
}

// 6, 7, 8, 10: training on the toy fixture

const SEEDS: [u64; 3] = [7, 8, 9];

struct Runs {
    acyclic: Vec<TrainingOutcome>,
    cyclic: Vec<TrainingOutcome>,
    _dir: tempfile::TempDir,
}

fn train_all() -> Runs {
    let dir = tempfile::tempdir().unwrap();
    let jobs: Vec<(ActionMode, u64)> = [ActionMode::Acyclic, ActionMode::Cyclic]
        .into_iter()
        .flat_map(|m| SEEDS.map(|s| (m, s)))
        .collect();
    let mut outcomes: Vec<TrainingOutcome> = thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(mode, seed)| {
                let out = dir.path().join(format!("{mode:?}-{seed}"));
                scope.spawn(move || {
                    let config = ExperimentConfig {
                        action_mode: mode,
                        seed,
                        output_dir: out,
                        ..fixture_config()
                    };
                    run_training(&config).expect("training runs")
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let cyclic = outcomes.split_off(SEEDS.len());
    Runs {
        acyclic: outcomes,
        cyclic,
        _dir: dir,
    }
}

fn criterion_6(runs: &Runs) -> Verdict {
    let config = fixture_config();
    let run = &runs.acyclic[0];
    let s = &run.summary;
    let ratio = s.test_avg_travel_time_s / s.fixed_test_avg_travel_time_s;
    let mins = s.wall_clock_s / 60.0;
    verdict(
        ratio <= 0.8 && config.total_epochs <= 200 && mins < 10.0,
        format!(
            "acyclic WAD SMDP, seed {}, {} epochs: test {:.2}s vs fixed-time {:.2}s = {:.1}% lower \
             (need >= 20%); {:.2} min (limit 10)",
            SEEDS[0],
            config.total_epochs,
            s.test_avg_travel_time_s,
            s.fixed_test_avg_travel_time_s,
            100.0 * (1.0 - ratio),
            mins
        ),
    )
}

fn criterion_7(runs: &Runs) -> Verdict {
    let mean = |rs: &[TrainingOutcome]| {
        rs.iter()
            .map(|r| r.summary.test_avg_travel_time_s)
            .sum::<f64>()
            / rs.len() as f64
    };
    let each = |rs: &[TrainingOutcome]| {
        rs.iter()
            .map(|r| format!("{:.2}", r.summary.test_avg_travel_time_s))
            .collect::<Vec<_>>()
            .join("/")
    };
    let (a, c) = (mean(&runs.acyclic), mean(&runs.cyclic));
    verdict(
        a <= c,
        format!(
            "mean test travel time over seeds {SEEDS:?}: acyclic {a:.3}s ({}) vs cyclic {c:.3}s ({})",
            each(&runs.acyclic),
            each(&runs.cyclic)
        ),
    )
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn criterion_8(runs: &Runs) -> Verdict {
    let rows = &runs.acyclic[0].rows;
    let reward: Vec<f64> = rows.iter().map(|r| r.mean_reward).collect();
    let att: Vec<f64> = rows.iter().map(|r| r.val_avg_travel_time_s).collect();
    let r = pearson(&reward, &att);
    verdict(
        r <= -0.8,
        format!(
            "{} evaluation rows, Pearson(mean reward, val travel time) = {r:.4} (need <= -0.8)",
            rows.len()
        ),
    )
}

fn criterion_10(runs: &Runs) -> Verdict {
    let ckpt = &runs.acyclic[0].checkpoint_path;
    let out: PathBuf = ckpt.with_file_name("sweep.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_tsc-lab"))
        .args(["sweep", "--grid-max", "5", "--checkpoint"])
        .arg(ckpt)
        .arg("--out")
        .arg(&out)
        .output()
        .expect("binary runs");
    if !status.status.success() {
        return verdict(false, String::from_utf8_lossy(&status.stderr).to_string());
    }
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let rows: Vec<(usize, usize, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (
                r[0].parse().unwrap(),
                r[1].parse().unwrap(),
                r[4].parse().unwrap(),
            )
        })
        .collect();
    let finite = rows.iter().all(|r| r.2.is_finite());
    let origin = rows.iter().find(|r| r.0 == 0 && r.1 == 0).map(|r| r.2);
    // smallest cross-lane queue that makes the network switch, per green-lane queue
    let boundary: Vec<String> = (0..=5)
        .map(|n1| {
            rows.iter()
                .filter(|r| r.0 == n1 && r.2 > 0.0)
                .map(|r| r.1)
                .min()
                .map_or("-".into(), |n2| n2.to_string())
        })
        .collect();
    verdict(
        rows.len() == 36 && finite,
        format!(
            "{} rows, all finite: {finite}; Q(switch)-Q(keep) at (0,0) = {:.4} (reported only); \
             switch boundary n2 per n1=0..5: [{}]",
            rows.len(),
            origin.unwrap_or(f64::NAN),
            boundary.join(",")
        ),
    )
}

// 9: state dimension and LIT identity

fn criterion_9() -> Verdict {
    let base = IntersectionSpec::default_eight();
    let mut phases: Vec<Vec<usize>> = base
        .phases
        .iter()
        .map(|p| p.green_movements.clone())
        .collect();
    phases.extend([vec![0], vec![2], vec![4], vec![6]]);
    let spec12 = Arc::new(
        IntersectionSpec::new(
            base.lanes.clone(),
            base.movements.clone(),
            base.conflicts.clone(),
            Some(phases),
            base.yellow_duration,
        )
        .unwrap(),
    );
    let sim = SimState::new(spec12.clone(), Arc::new(FlowDataset::empty(10)));
    let dim = observe(&sim, StateVariant::Wads).len();

    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let spec = Arc::new(IntersectionSpec::default_eight());
    let j = spec.num_lanes();
    let mut checked = 0;
    let mut mismatches = 0;
    while checked < 1000 {
        let flow = Arc::new(random_flow(&mut rng, j, 600));
        let mut sim = SimState::new(spec.clone(), flow);
        let steps = rng.gen_range(1..600);
        for _ in 0..steps {
            if !sim.is_yellow() && rng.gen_bool(0.05) {
                sim.command_signal(rng.gen_range(0..spec.num_phases()))
                    .unwrap();
            }
            sim.tick();
        }
        let lit = observe(&sim, StateVariant::Lit);
        let wa = observe(&sim, StateVariant::Wa);
        for lane in 0..j {
            if lit[lane] != (wa[lane] + wa[j + lane]).min(1.0) {
                mismatches += 1;
            }
        }
        if lit[j..] != wa[2 * j..] {
            mismatches += 1;
        }
        checked += 1;
    }
    verdict(
        dim == 44 && mismatches == 0,
        format!("WADS at J=8, I=12 has {dim} entries (4*8+12 = 44); LIT = min(1, w + a) blockwise on {checked} random states, {mismatches} mismatches"),
    )
}

fn main() {
    let names = [
        "simulator conservation and determinism",
        "SMDP transition accounting",
        "SMDP reward aggregation",
        "SOTL-2.0 oracle equivalence",
        "gradient correctness",
        "learning beats fixed-time",
        "acyclic at least as good as cyclic",
        "reward / travel-time proportionality",
        "state dimension and LIT identity",
        "Q-value sweep artifact",
    ];
    let guard = |f: &dyn Fn() -> Verdict| {
        catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| verdict(false, "panicked".to_string()))
    };

    let training_start = Instant::now();
    let runs = catch_unwind(train_all).ok();
    let training_secs = training_start.elapsed().as_secs_f64();
    let with_runs = |f: fn(&Runs) -> Verdict| match &runs {
        Some(r) => guard(&|| f(r)),
        None => verdict(false, "training failed"),
    };

    let verdicts = vec![
        guard(&criterion_1),
        guard(&criterion_2),
        guard(&criterion_3),
        guard(&criterion_4),
        guard(&criterion_5),
        with_runs(criterion_6),
        with_runs(criterion_7),
        with_runs(criterion_8),
        guard(&criterion_9),
        with_runs(criterion_10),
    ];

    println!();
    println!("acceptance criteria (training runs: {training_secs:.1}s for 6 runs in parallel)");
    let mut failed = 0;
    for (i, (name, v)) in names.iter().zip(&verdicts).enumerate() {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2}. {name}: {}", i + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("{} passed, {failed} failed", verdicts.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
