// Scratch calibration probe; not part of the deliverable.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sensodim::bootstrap::{offsets_to_configs, run_bootstrap, BootstrapParams, BootstrapStrategy};
use sensodim::cca::{estimate_dim_cca, CcaParams};
use sensodim::estimators::{estimate_dim_linear, singular_spectrum, spectrum_of};
use sensodim::sim::{build_system, sample_configurations, ExplorationMode, SystemSpec};
use sensodim::variation::{explore, VariationMatrix};

fn wrap(data: DMatrix<f64>) -> VariationMatrix {
    VariationMatrix {
        preprocessing: vec![],
        data,
        mode: ExplorationMode::Both,
        amplitude: 0.0,
    }
}

fn reduced(mut data: DMatrix<f64>) -> VariationMatrix {
    sensodim::variation::center_and_reduce(&mut data);
    wrap(data)
}

fn needle(n: usize, seed: u64) -> VariationMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u1 = [1.0 / 3f64.sqrt(); 3];
    let u2 = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
    let ratio: f64 = 1000.0;
    let s2 = 1.0 / ratio.sqrt();
    let mut data = DMatrix::zeros(3, n);
    for j in 0..n {
        let c1: f64 = rng.random_range(-1.0..1.0);
        let c2: f64 = rng.random_range(-1.0..1.0);
        for d in 0..3 {
            data[(d, j)] = c1 * u1[d] + c2 * s2 * u2[d];
        }
    }
    reduced(data)
}

fn needle_sweep(args: &[String]) {
    let p_max = 3;
    for &n in &[30usize, 40, 50, 60] {
        let mut ones = 0;
        let mut ratios = Vec::new();
        for seed in 0..10u64 {
            let vm = needle(n, seed);
            // window energy, replicating the estimator's definition
            let n_pts = vm.samples();
            let mut all_d: Vec<f64> = Vec::new();
            for i in 0..n_pts {
                for j in (i + 1)..n_pts {
                    all_d.push((vm.data.column(i) - vm.data.column(j)).norm());
                }
            }
            all_d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let keep = ((sensodim::cca::REPORT_WINDOW_DEGREE * n_pts as f64 / 2.0).ceil()
                as usize)
                .min(all_d.len());
            let r_star = all_d[keep - 1];
            let e_win: f64 = all_d[..keep].iter().map(|d| d * d).sum();
            let (est, costs) = profile_of(&vm, p_max, seed + 50);
            ones += usize::from(est == 1);
            ratios.push(costs[0] / e_win);
            let _ = r_star;
        }
        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        println!(
            "N={n}: est==1 in {ones}/10, J1/E quartiles {:.2e} {:.2e} {:.2e}",
            ratios[2], ratios[5], ratios[8]
        );
    }
    let _ = args;
}

fn arch(n: usize, seed: u64, curvature: f64) -> VariationMatrix {
    // half-cylinder arch: (u, v) -> (sin(cu)/c, v, (1-cos(cu))/c)
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = DMatrix::zeros(3, n);
    for j in 0..n {
        let u: f64 = rng.random_range(-1.0..1.0);
        let v: f64 = rng.random_range(-1.0..1.0);
        data[(0, j)] = (curvature * u).sin() / curvature;
        data[(1, j)] = v;
        data[(2, j)] = (1.0 - (curvature * u).cos()) / curvature;
    }
    reduced(data)
}

fn profile_of(vm: &VariationMatrix, p_max: usize, seed: u64) -> (usize, Vec<f64>) {
    let params = CcaParams {
        seed,
        iterations: std::env::var("PROBE_K").map_or(100, |s| s.parse().unwrap()),
        lr_initial: std::env::var("PROBE_LR0").map_or(5e-1, |s| s.parse().unwrap()),
        ..CcaParams::default()
    };
    let (est, profile) = estimate_dim_cca(vm, p_max, &params).unwrap();
    (est.value, profile.costs)
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let what = args.first().map(String::as_str).unwrap_or("help");
    match what {
        "linear-rates" => {
            // success of the linear method per amplitude over T trials
            let trials: usize = args.get(1).map_or(20, |s| s.parse().unwrap());
            let n_moves: usize = args.get(2).map_or(1000, |s| s.parse().unwrap());
            for amp in [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1] {
                let mut rates = vec![];
                for (mode, truth) in [
                    (ExplorationMode::AgentOnly, 9usize),
                    (ExplorationMode::EnvironmentOnly, 6),
                    (ExplorationMode::Both, 12),
                ] {
                    let mut ok = 0;
                    for t in 0..trials {
                        let sys = build_system(SystemSpec {
                            seed: sensodim::harness::system_seed(0, amp, mode, t),
                            ..SystemSpec::default()
                        })
                        .unwrap();
                        let configs = sample_configurations(&sys, mode, amp, n_moves, t as u64 + 900);
                        let vm = explore(&sys, &configs, mode, amp).unwrap();
                        let est = estimate_dim_linear(&singular_spectrum(&vm)).unwrap();
                        ok += usize::from(est.value == truth);
                    }
                    rates.push(100.0 * ok as f64 / trials as f64);
                }
                println!(
                    "amp {amp:>8.0e}  m {:>5.1}%  e {:>5.1}%  b {:>5.1}%",
                    rates[0], rates[1], rates[2]
                );
            }
        }
        "spectrum" => {
            let amp: f64 = args.get(1).map_or(1e-6, |s| s.parse().unwrap());
            let mode = match args.get(2).map(String::as_str) {
                Some("env") => ExplorationMode::EnvironmentOnly,
                Some("both") => ExplorationMode::Both,
                _ => ExplorationMode::AgentOnly,
            };
            for seed in 0..5u64 {
                let sys = build_system(SystemSpec {
                    seed,
                    ..SystemSpec::default()
                })
                .unwrap();
                let configs = sample_configurations(&sys, mode, amp, 1000, seed + 33);
                let vm = explore(&sys, &configs, mode, amp).unwrap();
                let sp = singular_spectrum(&vm);
                let v = sp.values();
                let est = estimate_dim_linear(&sp).unwrap().value;
                println!(
                    "seed {seed} est {est} sigma[0..16]: {:?}",
                    &v[..16.min(v.len())]
                        .iter()
                        .map(|x| format!("{x:.3e}"))
                        .collect::<Vec<_>>()
                );
            }
        }
        "needle-sweep" => needle_sweep(&args),
        "arch-sweep" => {
            for &curvature in &[0.6f64, 0.9, 1.2] {
                for &n in &[400usize, 700, 1000] {
                    let mut est2 = 0;
                    let mut j1j2 = Vec::new();
                    let mut j3j2 = Vec::new();
                    for seed in 0..10u64 {
                        let vm = arch(n, seed, curvature);
                        let (est, costs) = profile_of(&vm, 3, seed + 50);
                        est2 += usize::from(est == 2);
                        j1j2.push(costs[0] / costs[1]);
                        j3j2.push(costs[2] / costs[1]);
                    }
                    let med = |v: &mut Vec<f64>| {
                        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                        (v[4] + v[5]) / 2.0
                    };
                    println!(
                        "c={curvature} N={n}: est==2 {est2}/10  med J1/J2 {:.2e}  med J3/J2 {:.2e}",
                        med(&mut j1j2),
                        med(&mut j3j2)
                    );
                }
            }
        }
        "needle" => {
            let n: usize = args.get(1).map_or(1000, |s| s.parse().unwrap());
            for seed in 0..5u64 {
                let vm = needle(n, seed);
                let lin = estimate_dim_linear(&singular_spectrum(&vm)).unwrap().value;
                let t0 = std::time::Instant::now();
                let (est, costs) = profile_of(&vm, 3.min(vm.n()), seed + 50);
                println!(
                    "seed {seed}: linear {lin} cca {est} costs {:?}  ({:.1}s)",
                    costs.iter().map(|c| format!("{c:.4e}")).collect::<Vec<_>>(),
                    t0.elapsed().as_secs_f64()
                );
            }
        }
        "arch" => {
            let n: usize = args.get(1).map_or(1000, |s| s.parse().unwrap());
            let curvature: f64 = args.get(2).map_or(1.2, |s| s.parse().unwrap());
            for seed in 0..5u64 {
                let vm = arch(n, seed, curvature);
                let (est, costs) = profile_of(&vm, 3, seed + 50);
                println!(
                    "seed {seed}: cca {est} J(1..3) {:?}  J1/J2 {:.1} J3/J2 {:.4}",
                    costs.iter().map(|c| format!("{c:.4e}")).collect::<Vec<_>>(),
                    costs[0] / costs[1],
                    costs[2] / costs[1]
                );
            }
        }
        "cca-agent" => {
            let amp: f64 = args.get(1).map_or(1e-6, |s| s.parse().unwrap());
            let boot = args.get(2).map(String::as_str) == Some("boot");
            let n_moves = 1000;
            for seed in 0..3u64 {
                let sys = build_system(SystemSpec {
                    seed,
                    ..SystemSpec::default()
                })
                .unwrap();
                let mode = ExplorationMode::AgentOnly;
                let vm = if boot {
                    let params = BootstrapParams::new(BootstrapStrategy::Infinitesimal, amp);
                    let (commands, _) = run_bootstrap(&sys, mode, &params, n_moves, seed + 7).unwrap();
                    let configs = offsets_to_configs(&sys, mode, &commands);
                    explore(&sys, &configs, mode, amp).unwrap()
                } else {
                    let configs = sample_configurations(&sys, mode, amp, n_moves, seed + 7);
                    explore(&sys, &configs, mode, amp).unwrap()
                };
                let sp = singular_spectrum(&vm);
                println!(
                    "seed {seed} sigma[0..12] {:?}",
                    sp.values()[..12]
                        .iter()
                        .map(|x| format!("{x:.2e}"))
                        .collect::<Vec<_>>()
                );
                let t0 = std::time::Instant::now();
                let (est, costs) = profile_of(&vm, 15, seed + 50);
                println!(
                    "seed {seed}: cca {est} costs {:?} ({:.1}s)",
                    costs.iter().map(|c| format!("{c:.3e}")).collect::<Vec<_>>(),
                    t0.elapsed().as_secs_f64()
                );
            }
        }
        "boot-trace" => {
            let amp: f64 = args.get(1).map_or(1e-6, |s| s.parse().unwrap());
            let strategy = if args.get(2).map(String::as_str) == Some("finite") {
                BootstrapStrategy::Finite
            } else {
                BootstrapStrategy::Infinitesimal
            };
            let mode = match args.get(3).map(String::as_str) {
                Some("env") => ExplorationMode::EnvironmentOnly,
                Some("both") => ExplorationMode::Both,
                _ => ExplorationMode::AgentOnly,
            };
            let sys = build_system(SystemSpec {
                seed: 5,
                ..SystemSpec::default()
            })
            .unwrap();
            let params = BootstrapParams::new(strategy, amp);
            let (commands, trace) = run_bootstrap(&sys, mode, &params, 1000, 11).unwrap();
            for (b, it) in trace.iterations.iter().enumerate() {
                println!(
                    "iter {b}: est {} spread {:.3e} cmax {:.3e} gamma[..6] {:?} sigma[..13] {:?}",
                    it.significative,
                    it.spread,
                    it.cmax,
                    &it.gamma[..6.min(it.gamma.len())]
                        .iter()
                        .map(|x| format!("{x:.2}"))
                        .collect::<Vec<_>>(),
                    &it.spectrum[..13.min(it.spectrum.len())]
                        .iter()
                        .map(|x| format!("{x:.2e}"))
                        .collect::<Vec<_>>()
                );
            }
            let configs = offsets_to_configs(&sys, mode, &commands);
            let vm = explore(&sys, &configs, mode, amp).unwrap();
            let mut raw = sensodim::variation::raw_variations(&sys, &configs).unwrap();
            sensodim::variation::center_and_reduce(&mut raw);
            let sp = spectrum_of(&raw);
            println!(
                "final spectrum[..14]: {:?} linear est {}",
                &sp.values()[..14.min(sp.values().len())]
                    .iter()
                    .map(|x| format!("{x:.2e}"))
                    .collect::<Vec<_>>(),
                estimate_dim_linear(&singular_spectrum(&vm)).unwrap().value
            );
        }
        "needle-debug" => {
            let n: usize = args.get(1).map_or(1000, |s| s.parse().unwrap());
            let p: usize = args.get(2).map_or(1, |s| s.parse().unwrap());
            let k: usize = args.get(3).map_or(100, |s| s.parse().unwrap());
            let vm = needle(n, 0);
            let params = CcaParams {
                iterations: k,
                seed: 1,
                ..CcaParams::default()
            };
            let proj = sensodim::cca::cca_project(&vm, p, &params).unwrap();
            let in_rms = (vm.data.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
            let out_rms = (proj.points.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
            // windowed final cost at lambda_final
            let mut jw = 0.0;
            let mut in_window = 0usize;
            for i in 0..n {
                for j in (i + 1)..n {
                    let y = (proj.points.column(i) - proj.points.column(j)).norm();
                    if y <= params.neighborhood_final {
                        let x = (vm.data.column(i) - vm.data.column(j)).norm();
                        jw += (x - y) * (x - y);
                        in_window += 1;
                    }
                }
            }
            println!(
                "p={p} K={k}: J_all={:.4e} in_rms={in_rms:.3} out_rms={out_rms:.3} J_win={jw:.4e} pairs_in_window={in_window}",
                proj.final_cost
            );
        }
        "win-profile" => {
            // windowed-at-final-lambda cost profile for p = 1..p_max
            let dataset = args.get(1).map(String::as_str).unwrap_or("needle");
            let p_max: usize = args.get(2).map_or(15, |s| s.parse().unwrap());
            let amp: f64 = args.get(3).map_or(1e-6, |s| s.parse().unwrap());
            for seed in 0..3u64 {
                let vm = match dataset {
                    "needle" => needle(1000, seed),
                    "arch" => arch(1000, seed, 1.2),
                    "agent" | "agent-boot" | "env-boot" | "both-boot" => {
                        let mode = match dataset {
                            "env-boot" => ExplorationMode::EnvironmentOnly,
                            "both-boot" => ExplorationMode::Both,
                            _ => ExplorationMode::AgentOnly,
                        };
                        let sys = build_system(SystemSpec {
                            seed,
                            ..SystemSpec::default()
                        })
                        .unwrap();
                        if dataset == "agent" {
                            let configs = sample_configurations(&sys, mode, amp, 1000, seed + 7);
                            explore(&sys, &configs, mode, amp).unwrap()
                        } else {
                            let params =
                                BootstrapParams::new(BootstrapStrategy::Infinitesimal, amp);
                            let (commands, _) =
                                run_bootstrap(&sys, mode, &params, 1000, seed + 7).unwrap();
                            let configs = offsets_to_configs(&sys, mode, &commands);
                            explore(&sys, &configs, mode, amp).unwrap()
                        }
                    }
                    other => panic!("unknown dataset {other}"),
                };
                let n_pts = vm.samples();
                let params = CcaParams {
                    seed: seed + 71,
                    ..CcaParams::default()
                };
                let lambda_final = params.neighborhood_final;
                // input-window radius: percentile q of pairwise distances
                let q: f64 = args.get(4).map_or(0.015, |s| s.parse().unwrap());
                let mut all_d: Vec<f64> = Vec::with_capacity(n_pts * (n_pts - 1) / 2);
                for i in 0..n_pts {
                    for j in (i + 1)..n_pts {
                        all_d.push((vm.data.column(i) - vm.data.column(j)).norm());
                    }
                }
                all_d.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let r_star = all_d[((all_d.len() as f64 - 1.0) * q) as usize];
                let win_energy: f64 = all_d
                    .iter()
                    .take_while(|&&d| d <= r_star)
                    .map(|d| d * d)
                    .sum();
                let t0 = std::time::Instant::now();
                let mut out_wins = Vec::new();
                let mut in_wins = Vec::new();
                for p in 1..=p_max.min(vm.n()) {
                    let pp = CcaParams {
                        seed: sensodim::rng::derive_seed(params.seed, p as u64),
                        ..params.clone()
                    };
                    let proj = sensodim::cca::cca_project(&vm, p, &pp).unwrap();
                    let mut jw_out = 0.0;
                    let mut jw_in = 0.0;
                    for i in 0..n_pts {
                        for j in (i + 1)..n_pts {
                            let y = (proj.points.column(i) - proj.points.column(j)).norm();
                            let x = (vm.data.column(i) - vm.data.column(j)).norm();
                            if y <= lambda_final {
                                jw_out += (x - y) * (x - y);
                            }
                            if x <= r_star {
                                jw_in += (x - y) * (x - y);
                            }
                        }
                    }
                    out_wins.push(jw_out);
                    in_wins.push(jw_in);
                }
                println!(
                    "{dataset} seed {seed} r*={r_star:.3} win_energy={win_energy:.3e} ({:.0}s)",
                    t0.elapsed().as_secs_f64()
                );
                println!(
                    "  J_outwin {:?}",
                    out_wins.iter().map(|c| format!("{c:.2e}")).collect::<Vec<_>>()
                );
                println!(
                    "  J_inwin  {:?}",
                    in_wins.iter().map(|c| format!("{c:.2e}")).collect::<Vec<_>>()
                );
                println!(
                    "  J_in/energy {:?}",
                    in_wins
                        .iter()
                        .map(|c| format!("{:.1e}", c / win_energy))
                        .collect::<Vec<_>>()
                );
            }
        }
        "step-debug" => {
            use sensodim::bootstrap::configs_to_offsets;
            let amp: f64 = args.get(1).map_or(1e-6, |s| s.parse().unwrap());
            let sys = build_system(SystemSpec {
                seed: 5,
                ..SystemSpec::default()
            })
            .unwrap();
            let mode = ExplorationMode::AgentOnly;
            let configs = sample_configurations(&sys, mode, amp, 1000, 11);
            let commands = configs_to_offsets(&sys, mode, &configs);
            let n_moves = commands.ncols();

            // replicate the step's internals
            let cfgs = sensodim::bootstrap::offsets_to_configs(&sys, mode, &commands);
            let mut sensory = sensodim::variation::raw_variations(&sys, &cfgs).unwrap();
            for r in 0..sensory.nrows() {
                let mean = sensory.row(r).sum() / n_moves as f64;
                for c in 0..n_moves {
                    sensory[(r, c)] -= mean;
                }
            }
            let cmax = commands.amax();
            let smax = sensory.amax();
            let commands_n = &commands / cmax;
            let sensory_n = &sensory / smax;
            let svd = sensory_n.clone().svd(false, true);
            let full_v_t = svd.v_t.as_ref().unwrap();
            let mut spectrum: Vec<f64> = svd.singular_values.iter().copied().collect();
            spectrum.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let k = 9;
            let v1_t = full_v_t.rows(0, k).into_owned();
            let relevant = &commands_n * v1_t.transpose();
            println!(
                "|w_j| columns of V': {:?}",
                (0..k)
                    .map(|j| format!("{:.3e}", relevant.column(j).norm()))
                    .collect::<Vec<_>>()
            );
            let rel_svd = relevant.clone().svd(false, false);
            println!(
                "sigma(V'): {:?}",
                rel_svd
                    .singular_values
                    .iter()
                    .map(|x| format!("{x:.3e}"))
                    .collect::<Vec<_>>()
            );
            let silent_span = &commands_n - &relevant * &v1_t;
            let sil_svd = silent_span.clone().svd(false, false);
            println!(
                "sigma(silent): {:?}",
                sil_svd
                    .singular_values
                    .iter()
                    .map(|x| format!("{x:.3e}"))
                    .collect::<Vec<_>>()
            );
        }
        other => {
            eprintln!("unknown probe `{other}`");
            eprintln!("probes: linear-rates, spectrum, needle, arch, cca-agent, boot-trace, needle-debug, step-debug");
        }
    }
}
