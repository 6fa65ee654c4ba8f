//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_sizer_core::catalog::{
    builtin_usecase, builtin_usecases, enumerate_realizations, ScenarioRealization, TemplateScenario, UePlacement,
};
use ris_sizer_core::geometry::{element_positions, NodeLayout, ScenarioGeometryInput, Vec3};
use ris_sizer_core::kpi::{
    self, bearing_sweep, default_ladder, evaluate_realization, mean_power_db, mean_snr_db, min_ris_size,
    outage_probability, spread_db, AveragingDomain, Criterion as SizingCriterion, KpiPool, SweepOptions, DEFAULT_EPSILON,
    DEFAULT_THRESHOLDS_DB,
};
use ris_sizer_core::link::{from_db, noise_power, to_db, watts_to_dbm, Decibel, NoiseParams, BOLTZMANN};
use ris_sizer_core::scattering::{link_power, PhaseControl};
use ris_sizer_core::{PhaseStates, RadioParams, RisPanel};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("aperture_scaling_40x40_vs_20x20", Duration::from_secs(10), aperture_scaling),
        ("one_bit_quantization_loss", Duration::from_secs(30), one_bit_loss),
        ("ple_anchor", Duration::from_secs(10), ple_anchor),
        ("noise_floor", Duration::from_secs(1), noise_floor),
        ("bearing_sweep_trend", Duration::from_secs(120), bearing_trend),
        ("monotonicity_uc5_uc7_uc16", Duration::from_secs(600), monotonicity),
        ("oracle_equivalence", Duration::from_secs(60), oracle_equivalence),
        ("sweep_determinism", Duration::from_secs(120), determinism),
        ("catalog_fidelity", Duration::from_secs(1), catalog_fidelity),
        ("shadow_semantics", Duration::from_secs(1), shadow_semantics),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let mut o = run();
        let took = start.elapsed();
        if took > budget {
            o.pass = false;
            o.detail += &format!("; over time budget {budget:?}");
        }
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} {name}: {} [{:.2}s]", o.detail, took.as_secs_f64());
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn template_power(size: usize, states: PhaseStates) -> f64 {
    let t = TemplateScenario::reference();
    let panel = t.panel(size, size).with_phase_states(states);
    let layout = t.layout(UePlacement::Arc).unwrap();
    let grid = element_positions(&panel, &layout);
    link_power(&panel, &grid, &layout, &t.radio, PhaseControl::Targeted)
}

fn aperture_scaling() -> Outcome {
    let gain = to_db(template_power(40, PhaseStates::Continuous) / template_power(20, PhaseStates::Continuous));
    check((gain - 12.04).abs() <= 0.3, format!("gain {gain:.3} dB, target 12.04 ± 0.3"))
}

fn one_bit_loss() -> Outcome {
    let uc = builtin_usecase(7).unwrap();
    let size = [kpi::RisSize::square(20)];
    let opts = |states| SweepOptions {
        phase_states: states,
        ..SweepOptions::for_usecase(&uc)
    };
    let cont = &kpi::run_sweep(&uc, &size, &opts(PhaseStates::Continuous)).unwrap()[0];
    let quant = &kpi::run_sweep(&uc, &size, &opts(PhaseStates::ONE_BIT)).unwrap()[0];
    let ratios: Vec<f64> = cont
        .samples
        .iter()
        .zip(&quant.samples)
        .filter(|(c, _)| c.mu > 0.0)
        .map(|(c, q)| q.mu / c.mu)
        .collect();
    let loss = to_db(ratios.iter().sum::<f64>() / ratios.len() as f64);
    let oracle = to_db((2.0 / PI).powi(2));
    check(
        ratios.len() >= 1000 && (loss - oracle).abs() <= 0.4,
        format!("{} geometries, loss {loss:.3} dB, oracle {oracle:.3} ± 0.4", ratios.len()),
    )
}

fn ple_anchor() -> Outcome {
    let t = TemplateScenario::reference();
    let panel = t.panel(10, 10).with_phase_states(PhaseStates::Continuous);
    let ris = Vec3::new(0.0, 0.0, t.geometry.h_ris);
    let bs = Vec3::new(t.geometry.d_bs_ris, 0.0, t.geometry.h_bs);
    let power = |ple_r: f64, d: f64| {
        let layout = NodeLayout::new(bs, ris, Vec3::X, Vec3::new(d, 0.0, t.geometry.h_ris)).unwrap();
        let radio = RadioParams { ple_r, ..t.radio };
        let grid = element_positions(&panel, &layout);
        link_power(&panel, &grid, &layout, &radio, PhaseControl::Targeted)
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (ple, target) in [(2.0, -6.02), (1.785, -5.37)] {
        let delta = to_db(power(ple, 2000.0) / power(ple, 1000.0));
        pass &= (delta - target).abs() <= 0.1;
        parts.push(format!("ple {ple}: {delta:.3} dB (target {target} ± 0.1)"));
    }
    check(pass, parts.join(", "))
}

fn noise_floor() -> Outcome {
    let n = NoiseParams {
        t_s: 290.0,
        bw: 15e3,
        f_n: from_db(0.0),
        k_b: BOLTZMANN,
    };
    let dbm = watts_to_dbm(noise_power(&n));
    check((dbm + 132.21).abs() <= 0.05, format!("N_o {dbm:.3} dBm, target -132.21 ± 0.05"))
}

fn bearing_trend() -> Outcome {
    let bearings: Vec<f64> = (-12..=12).map(|i| 5.0 * i as f64).collect();
    let spread = |h: f64| {
        let t = TemplateScenario::reference().with_ris_height(h);
        let pts = bearing_sweep(&t, kpi::RisSize::square(20), &bearings, PhaseStates::ONE_BIT, UePlacement::Street)
            .unwrap();
        spread_db(pts.iter().map(|p| p.snr_db))
    };
    let (low, high) = (spread(40.0), spread(160.0));
    check(
        (4.0..=10.0).contains(&low) && high < low,
        format!("spread at 40 m {low:.2} dB (want [4, 10]), at 160 m {high:.2} dB (want < 40 m)"),
    )
}

fn monotonicity() -> Outcome {
    let mut problems = Vec::new();
    let ladder = default_ladder();
    for id in [5, 7, 16] {
        let uc = builtin_usecase(id).unwrap();
        let pools = kpi::run_sweep(&uc, &ladder, &SweepOptions::for_usecase(&uc)).unwrap();
        for w in pools.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let lin = AveragingDomain::Linear;
            if mean_power_db(b, lin) < mean_power_db(a, lin) {
                problems.push(format!("UC-{id} power {} > {}", a.ris_size, b.ris_size));
            }
            if mean_snr_db(b, lin) < mean_snr_db(a, lin) {
                problems.push(format!("UC-{id} SNR {} > {}", a.ris_size, b.ris_size));
            }
            for th in DEFAULT_THRESHOLDS_DB {
                if outage_probability(b, th) > outage_probability(a, th) {
                    problems.push(format!("UC-{id} OP@{th} {} < {}", a.ris_size, b.ris_size));
                }
            }
        }
        for criterion in [SizingCriterion::MeanSnr, SizingCriterion::Outage] {
            let r = min_ris_size(&pools, &DEFAULT_THRESHOLDS_DB, criterion, DEFAULT_EPSILON, AveragingDomain::Linear)
                .unwrap();
            let rank: Vec<usize> = r
                .min_size_per_threshold
                .iter()
                .map(|o| o.size().map_or(usize::MAX, |s| s.elements()))
                .collect();
            if rank.windows(2).any(|w| w[1] < w[0]) {
                problems.push(format!("UC-{id} {criterion:?} sizing not monotone: {rank:?}"));
            }
        }
    }
    check(
        problems.is_empty(),
        if problems.is_empty() {
            format!("{} sizes x 3 use cases monotone", ladder.len())
        } else {
            problems.join("; ")
        },
    )
}

/// Plain per-element summation written directly from the model, sharing no
/// code with the production kernel.
fn naive_power(panel: &RisPanel, radio: &RadioParams, bs: Vec3, ris: Vec3, ue: Vec3) -> f64 {
    let lambda = 299_792_458.0 / radio.f_c;
    let k0 = 2.0 * PI / lambda;
    let c = radio.p_t * radio.g_t * radio.g_r * lambda * lambda * panel.delta_h * panel.delta_v / (64.0 * PI * PI * PI);
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for k in 0..panel.n_v {
        for l in 0..panel.n_h {
            let y = ris.y + (l as f64 - (panel.n_h as f64 - 1.0) / 2.0) * panel.d_h;
            let z = ris.z + ((panel.n_v as f64 - 1.0) / 2.0 - k as f64) * panel.d_v;
            let e = [ris.x, y, z];
            let dt = ((bs.x - e[0]).powi(2) + (bs.y - e[1]).powi(2) + (bs.z - e[2]).powi(2)).sqrt();
            let dr = ((ue.x - e[0]).powi(2) + (ue.y - e[1]).powi(2) + (ue.z - e[2]).powi(2)).sqrt();
            let cos_t = (bs.x - e[0]) / dt;
            let cos_r = (ue.x - e[0]) / dr;
            let rho = (c * cos_t.powf(radio.q_pattern) * cos_r.powf(radio.q_pattern)).sqrt()
                / (dt.powf(radio.ple_t / 2.0) * dr.powf(radio.ple_r / 2.0));
            let travel = k0 * (dt + dr);
            let target = travel.rem_euclid(TAU);
            let phi = match panel.phase_states {
                PhaseStates::Continuous => target,
                PhaseStates::Discrete(n) => {
                    let step = TAU / n as f64;
                    let dist = |i: u32| {
                        let d = (target - step * i as f64).rem_euclid(TAU);
                        d.min(TAU - d)
                    };
                    let best = (0..n).fold(0, |b, i| if dist(i) < dist(b) { i } else { b });
                    step * best as f64
                }
            };
            let psi = travel - phi;
            re += rho * psi.cos();
            im -= rho * psi.sin();
        }
    }
    re * re + im * im
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut cases = 0;
    while cases < 1000 {
        let f_c = [3.5e9, 8e9, 27e9][rng.random_range(0..3)];
        let states = [PhaseStates::Continuous, PhaseStates::ONE_BIT, PhaseStates::Discrete(4)][rng.random_range(0..3)];
        let panel = RisPanel::half_wavelength(rng.random_range(1..=40), rng.random_range(1..=40), f_c)
            .with_phase_states(states);
        let radio = RadioParams {
            f_c,
            p_t: rng.random_range(0.1..50.0),
            g_t: from_db(rng.random_range(0.0..20.0)),
            g_r: from_db(rng.random_range(0.0..10.0)),
            ple_t: rng.random_range(1.5..3.5),
            ple_r: rng.random_range(1.5..3.5),
            q_pattern: rng.random_range(0.5..3.0),
        };
        let g = ScenarioGeometryInput {
            h_bs: rng.random_range(1.0..100.0),
            h_ris: rng.random_range(1.0..100.0),
            h_ue: rng.random_range(1.0..100.0),
            d_bs_ris: rng.random_range(5.0..1500.0),
            d_ris_ue: rng.random_range(5.0..1500.0),
            bearing_bs: rng.random_range(-80.0..80.0),
            bearing_ue: rng.random_range(-80.0..80.0),
        };
        let Ok(layout) = ris_sizer_core::geometry::place_nodes(&g) else {
            continue;
        };
        let grid = element_positions(&panel, &layout);
        let prod = link_power(&panel, &grid, &layout, &radio, PhaseControl::Targeted);
        let naive = naive_power(&panel, &radio, layout.bs, layout.ris_center, layout.ue);
        worst = worst.max((prod - naive).abs() / naive);
        cases += 1;
    }
    check(worst <= 1e-9, format!("{cases} cases, worst relative error {worst:.2e} (limit 1e-9)"))
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    files
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for (i, workers) in ["1", "1", "4", "8"].iter().enumerate() {
        for format in ["csv", "json"] {
            let out = root.path().join(format!("run{i}_{format}"));
            let args = [
                "ris-sizer", "sweep", "--usecase", "7", "--sizes", "10,20", "--seed", "0", "--workers", workers,
                "--format", format, "--out", out.to_str().unwrap(),
            ];
            let (mut so, mut se) = (Vec::new(), Vec::new());
            let code = ris_sizer_cli::main_with_args(args, &mut so, &mut se);
            if code != 0 {
                return check(false, format!("sweep exited {code}: {}", String::from_utf8_lossy(&se)));
            }
            runs.push((format, workers, read_dir_bytes(&out)));
        }
    }
    // Two pools, the summary and two cache entries per run.
    let mut problems = Vec::new();
    for format in ["csv", "json"] {
        let same: Vec<_> = runs.iter().filter(|r| r.0 == format).collect();
        let reference = &same[0].2;
        if reference.len() != 5 {
            problems.push(format!("{format}: {} files, expected 5", reference.len()));
        }
        for (_, workers, files) in &same[1..] {
            for (name, bytes) in reference {
                if files.get(name) != Some(bytes) {
                    problems.push(format!("{format}: {name} differs with --workers {workers}"));
                }
            }
        }
    }
    check(
        problems.is_empty(),
        if problems.is_empty() {
            format!("UC-7 10x10+20x20, {} runs over workers 1/1/4/8 and csv/json, byte-identical", runs.len())
        } else {
            problems.join("; ")
        },
    )
}

// Use-case tables, transcribed separately from the catalog module.
// id | name | P_t dBm | f_c MHz | B kHz | h_BS | h_RIS | h_UE | d_BS-RIS | d_RIS-UE
const GOLDEN: &str = "
1|Sub-6 Umi|37|3500|1440|10 15 20 30|10 25 40|1 2 5 15 30 50 100|50 100 150 200|50 100 150 200
2|Sub-6 Uma|46|3500|1440|10 15 20 30|10 25 40|1 2 5 15 30 50 100|200 300 400 500|200 300 400 500
3|Sub-6 RMa|52|3500|1440|10 15 20 30|10 25 40|1 2 5 15 30|500 1000 1500 2000|500 1000 1500 2000
4|FR3 Umi|37|8000|2880|10 15 20 30|10 25 40|1 2 5 15 30 50 100|50 75 125 150|50 75 125 150
5|FR3 Uma|46|8000|2880|10 15 20 30|10 25 40|1 2 5 15 30 50 100|100 175 225 300|50 75 125 150
6|FR3 RMa|52|8000|2880|10 15 20 30|10 25 40|1 2 5 15 30|300 700 1100 1500|300 700 1100 1500
7|mmW Umi|40|27000|8640|10 15 20 30|10 25 40|1 2 5 15 30 50 100|20 50 70 100|20 50 70 100
8|mmW Uma|49|27000|8640|10 15 20 30|10 25 40|1 2 5 15 30 50 100|50 100 150 200|50 100 150 200
9|mmW RMa|55|27000|17280|10 15 20 30|10 25 40|1 2 5 15 30|100 400 700 1000|100 400 700 1000
10|Home Wifi|30|6000|2160|1 2 3|2 3|1 2|3 5 8|3 5 8
11|Sub-6 GHz Small Office|30|3500|1440|2 3 4|2 3 4|1 2 3|3 10 15 20|3 10 15 20
12|Sub-6 GHz Large Industrial|37|3500|2880|4 6 8 10|4 6 8 10|1 2 4 6 8|20 40 60 80|20 40 60 80
13|FR3 Small Office|30|8000|4320|2 3 4|2 4 6|1 2|2 5 10 15|2 5 10 15
14|FR3 Large Industrial|37|8000|8640|4 6 8 10|4 6 8 10|1 2 4 6 8|10 30 50 80|10 30 50 80
15|mmWave Small Office|30|27000|8640|2 3 4|2 4 6|1 2|1 3 6.5 10|1 3 6.5 10
16|mmWave Large Industrial|37|27000|8640|4 6 8 10|4 6 8 10|1 2 4 6 8|5 20 50 80|5 20 50 80
";

fn catalog_fidelity() -> Outcome {
    let set = |s: &str| -> Vec<f64> { s.split_whitespace().map(|v| v.parse().unwrap()).collect() };
    let built = builtin_usecases();
    let mut mismatches = Vec::new();
    let rows: Vec<&str> = GOLDEN.trim().lines().collect();
    if built.len() != rows.len() {
        mismatches.push(format!("{} use cases, expected {}", built.len(), rows.len()));
    }
    for row in rows {
        let c: Vec<&str> = row.split('|').collect();
        let id: u32 = c[0].parse().unwrap();
        let Some(u) = built.iter().find(|u| u.id == id) else {
            mismatches.push(format!("UC-{id} missing"));
            continue;
        };
        let same = u.name == c[1]
            && u.p_t_dbm == c[2].parse::<f64>().unwrap()
            && u.f_c_mhz == c[3].parse::<f64>().unwrap()
            && u.b_ue_khz == c[4].parse::<f64>().unwrap()
            && u.h_bs_set == set(c[5])
            && u.h_ris_set == set(c[6])
            && u.h_ue_set == set(c[7])
            && u.d_bs_ris_set == set(c[8])
            && u.d_ris_ue_set == set(c[9]);
        if !same {
            mismatches.push(format!("UC-{id} differs"));
        }
    }
    check(
        mismatches.is_empty(),
        if mismatches.is_empty() { "16 use cases, every cell equal".to_string() } else { mismatches.join("; ") },
    )
}

fn shadow_semantics() -> Outcome {
    let uc = builtin_usecase(7).unwrap();
    let base = enumerate_realizations(&uc, &[0.0]).unwrap().get(0).unwrap();
    let panel = uc.panel(10, 10);
    let bearings = [90.0, -90.0, 95.0, -135.0, 180.0, 120.0];
    let samples: Vec<_> = bearings
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let r = ScenarioRealization {
                realization_id: i,
                geometry: ScenarioGeometryInput {
                    bearing_ue: b,
                    ..base.geometry
                },
                ..base
            };
            evaluate_realization(&r, &panel, 1.0).unwrap()
        })
        .collect();
    let pool = KpiPool {
        usecase_id: uc.id,
        ris_size: kpi::RisSize::square(10),
        samples,
    };
    let all_zero = pool.samples.iter().all(|s| s.mu == 0.0 && s.gamma_db() == f64::NEG_INFINITY);
    let sentinel = serde_json::to_string(&Decibel(pool.samples[0].gamma_db())).unwrap() == "\"-inf\"";
    let outage = outage_probability(&pool, -1e9) == 1.0;
    check(
        all_zero && sentinel && outage,
        format!("{} bearings |b| >= 90: mu=0 {all_zero}, -inf sentinel {sentinel}, outage {outage}", bearings.len()),
    )
}
