//! Subcommand implementations.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use ris_sizer_core::catalog::{builtin_usecases, enumerate_realizations, UseCase};
use ris_sizer_core::kpi::{self, min_ris_size, mean_snr_db, KpiPool, RisSize, SizeOutcome};
use ris_sizer_core::link::Decibel;
use ris_sizer_core::replay::{self, ReplayScenario, Trajectory};
use ris_sizer_core::report::{
    self, PdfEntry, PdfReport, PoolDocument, Provenance, ReplayStats, ReplayStatsEntry, SizingReport,
    SweepSummary, SHADOW_POLICY,
};
use serde::Serialize;

use crate::config::{parse_list_f64, read_input, ListArgs, ListFormat, PoolFormat, ReplayArgs, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{write_atomic, write_json, PoolCache, PoolKey, MODEL_ID};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn rt(context: &str) -> impl Fn(ris_sizer_core::Error) -> CliError + '_ {
    move |e| CliError::runtime(context, e)
}

#[derive(Serialize)]
struct ListRow<'a> {
    id: u32,
    name: &'a str,
    f_c_mhz: f64,
    p_t_dbm: f64,
    b_ue_khz: f64,
    realizations: usize,
}

pub fn list_usecases(args: &ListArgs, out: &mut dyn Write) -> CliResult<()> {
    let all = builtin_usecases();
    let band = args.band.as_deref().map(str::to_lowercase);
    let selected: Vec<&UseCase> = all
        .iter()
        .filter(|u| band.as_ref().is_none_or(|b| u.name.to_lowercase().contains(b.as_str())))
        .collect();
    let rows: Vec<ListRow> = selected
        .iter()
        .map(|u| ListRow {
            id: u.id,
            name: &u.name,
            f_c_mhz: u.f_c_mhz,
            p_t_dbm: u.p_t_dbm,
            b_ue_khz: u.b_ue_khz,
            realizations: u.realization_count(u.bearings().len()),
        })
        .collect();
    let io = |e: std::io::Error| CliError::runtime("writing stdout", e);
    match args.format {
        ListFormat::Json => {
            let docs: Vec<&UseCase> = selected;
            serde_json::to_writer_pretty(&mut *out, &docs).map_err(|e| CliError::runtime("serializing", e))?;
            writeln!(out).map_err(io)?;
        }
        ListFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            for r in &rows {
                w.serialize(r).map_err(|e| CliError::runtime("writing CSV", e))?;
            }
            w.flush().map_err(io)?;
        }
        ListFormat::Table => {
            writeln!(out, "{:>3}  {:<28} {:>9} {:>7} {:>8} {:>12}", "id", "name", "f_c[MHz]", "P_t[dBm]", "B[kHz]", "realizations")
                .map_err(io)?;
            for r in &rows {
                writeln!(
                    out,
                    "{:>3}  {:<28} {:>9} {:>7} {:>8} {:>12}",
                    r.id, r.name, r.f_c_mhz, r.p_t_dbm, r.b_ue_khz, r.realizations
                )
                .map_err(io)?;
            }
        }
    }
    Ok(())
}

fn pool_key(cfg: &RunConfig, size: RisSize) -> PoolKey {
    PoolKey {
        model: MODEL_ID.into(),
        usecase: cfg.usecase.clone(),
        radio: cfg.usecase.radio(),
        noise: cfg.usecase.noise(),
        ris_size: size,
        bearings_deg: cfg.bearings_deg.clone(),
        phase_states: cfg.phase_states,
        e_b: cfg.e_b,
    }
}

fn compute(cfg: &RunConfig, sizes: &[RisSize]) -> CliResult<Vec<KpiPool>> {
    if sizes.is_empty() {
        return Ok(Vec::new());
    }
    kpi::run_sweep(&cfg.usecase, sizes, &cfg.sweep_options()).map_err(rt("sweep"))
}

/// Pools for every configured size. With `reuse`, cached pools are read and
/// only missing sizes are evaluated; either way the cache is refreshed.
pub fn pools(cfg: &RunConfig, reuse: bool) -> CliResult<Vec<KpiPool>> {
    let cache = PoolCache::new(&cfg.out);
    let mut found: HashMap<RisSize, KpiPool> = HashMap::new();
    if reuse {
        for &s in &cfg.sizes {
            if let Some(p) = cache.load(&pool_key(cfg, s)) {
                found.insert(s, p);
            }
        }
    }
    let missing: Vec<RisSize> = cfg.sizes.iter().copied().filter(|s| !found.contains_key(s)).collect();
    for pool in compute(cfg, &missing)? {
        cache.store(&pool_key(cfg, pool.ris_size), &pool)?;
        found.insert(pool.ris_size, pool);
    }
    Ok(cfg.sizes.iter().map(|s| found.remove(s).expect("every size evaluated")).collect())
}

fn provenance(cfg: &RunConfig) -> Provenance {
    Provenance::new(TOOL_VERSION, cfg.to_json())
}

fn binnings(cfg: &RunConfig, pools: &[KpiPool]) -> (kpi::Binning, kpi::Binning) {
    let power: Vec<Vec<f64>> = pools.iter().map(KpiPool::power_dbm).collect();
    let snr: Vec<Vec<f64>> = pools.iter().map(KpiPool::snr_db).collect();
    (cfg.bins.binning(&power), cfg.bins.binning(&snr))
}

fn sizing(cfg: &RunConfig, pools: &[KpiPool]) -> CliResult<kpi::SizingResult> {
    min_ris_size(pools, &cfg.thresholds_db, cfg.criterion, cfg.epsilon, cfg.averaging).map_err(rt("sizing"))
}

fn write_sizing_table(out: &mut dyn Write, uc: &UseCase, result: &kpi::SizingResult) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::runtime("writing stdout", e);
    writeln!(out, "UC-{} {} ({:?}, epsilon {})", uc.id, uc.name, result.criterion, result.epsilon).map_err(io)?;
    writeln!(out, "{:>14}  {:>14}", "threshold[dB]", "min size").map_err(io)?;
    for (t, s) in result.thresholds_db.iter().zip(&result.min_size_per_threshold) {
        let s = match s {
            SizeOutcome::Size(s) => s.to_string(),
            SizeOutcome::NotAchievable => "NOT_ACHIEVABLE".into(),
        };
        writeln!(out, "{t:>14}  {s:>14}").map_err(io)?;
    }
    Ok(())
}

pub fn sweep(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let pools = pools(cfg, false)?;
    let prov = provenance(cfg);
    let space = enumerate_realizations(&cfg.usecase, &cfg.bearings_deg).map_err(rt("enumerate"))?;
    let id = cfg.usecase.id;
    for pool in &pools {
        let path = cfg.out.join(format!("uc{id}_{}_pool.{}", pool.ris_size, cfg.format.extension()));
        match cfg.format {
            PoolFormat::Csv => write_atomic(&path, |w| {
                report::write_pool_csv(w, &prov, &space, pool).map_err(rt("writing pool CSV"))
            })?,
            PoolFormat::Json => write_json(&path, &PoolDocument::new(prov.clone(), pool))?,
        }
    }
    let (power_bins, snr_bins) = binnings(cfg, &pools);
    let sizes = pools
        .iter()
        .map(|p| {
            let mut s = report::summarize_pool(p, &cfg.thresholds_db, &power_bins, cfg.averaging)
                .map_err(rt("summarizing pool"))?;
            // Power and SNR bins are chosen independently.
            if power_bins != snr_bins {
                s.snr_pdf_db = report::summarize_pool(p, &cfg.thresholds_db, &snr_bins, cfg.averaging)
                    .map_err(rt("summarizing pool"))?
                    .snr_pdf_db;
            }
            Ok(s)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let summary = SweepSummary {
        provenance: prov,
        kind: "sweep_summary".into(),
        usecase: cfg.usecase.clone(),
        realizations: space.len(),
        averaging: cfg.averaging,
        shadow_policy: SHADOW_POLICY.into(),
        sizes,
        sizing: sizing(cfg, &pools)?,
    };
    write_json(&cfg.out.join(format!("uc{id}_summary.json")), &summary)?;
    let io = |e: std::io::Error| CliError::runtime("writing stdout", e);
    writeln!(out, "UC-{id} {}: {} realizations x {} sizes -> {}", cfg.usecase.name, space.len(), pools.len(), cfg.out.display())
        .map_err(io)?;
    writeln!(out, "{:>8}  {:>14}  {:>12}  {:>8}", "size", "mean P[dBm]", "mean SNR[dB]", "shadow").map_err(io)?;
    for s in &summary.sizes {
        writeln!(
            out,
            "{:>8}  {:>14.2}  {:>12.2}  {:>8.3}",
            s.ris_size.to_string(),
            s.mean_power_dbm.0,
            s.mean_snr_db.0,
            s.shadow_fraction
        )
        .map_err(io)?;
    }
    Ok(())
}

pub fn size(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let pools = pools(cfg, true)?;
    let result = sizing(cfg, &pools)?;
    let report = SizingReport {
        provenance: provenance(cfg),
        kind: "sizing".into(),
        usecase: cfg.usecase.clone(),
        mean_snr_db: pools
            .iter()
            .map(|p| (p.ris_size, Decibel(mean_snr_db(p, cfg.averaging))))
            .collect(),
        sizing: result.clone(),
    };
    write_json(&cfg.out.join(format!("uc{}_sizing.json", cfg.usecase.id)), &report)?;
    write_sizing_table(out, &cfg.usecase, &result)
}

pub fn pdf(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let pools = pools(cfg, true)?;
    let (power_bins, snr_bins) = binnings(cfg, &pools);
    let pdf = |xs: Vec<f64>, b: &kpi::Binning| match kpi::estimate_pdf(&xs, b) {
        Ok(h) => Ok(Some(h)),
        Err(ris_sizer_core::Error::Empty(_)) => Ok(None),
        Err(e) => Err(CliError::runtime("estimating pdf", e)),
    };
    let sizes = pools
        .iter()
        .map(|p| {
            Ok(PdfEntry {
                ris_size: p.ris_size,
                power_pdf_dbm: pdf(p.power_dbm(), &power_bins)?,
                snr_pdf_db: pdf(p.snr_db(), &snr_bins)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let report = PdfReport {
        provenance: provenance(cfg),
        kind: "pdf".into(),
        usecase_id: cfg.usecase.id,
        shadow_policy: SHADOW_POLICY.into(),
        sizes,
    };
    let path = cfg.out.join(format!("uc{}_pdf.json", cfg.usecase.id));
    write_json(&path, &report)?;
    let io = |e: std::io::Error| CliError::runtime("writing stdout", e);
    for e in &report.sizes {
        let bins = e.snr_pdf_db.as_ref().map_or(0, |h| h.counts.len());
        writeln!(out, "{:>8}  {bins:>4} SNR bins", e.ris_size.to_string()).map_err(io)?;
    }
    writeln!(out, "wrote {}", path.display()).map_err(io)
}

#[derive(Serialize)]
struct ReplayConfig<'a> {
    scenario: &'a ReplayScenario,
    scenario_source: String,
    trajectory_source: String,
    measurements_source: Option<String>,
    ple: &'a [f64],
}

/// Measured SNR per trajectory label from a CSV with `label` and `snr_db`
/// columns.
fn read_measurements(path: &Path, trajectory: &Trajectory) -> CliResult<Vec<Decibel>> {
    let text = read_input(path, "--measurements")?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| CliError::config("--measurements", e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("--measurements: missing `{name}` column")))
    };
    let (label_col, snr_col) = (col("label")?, col("snr_db")?);
    let mut by_label = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::config("--measurements", e))?;
        let snr: Decibel = rec[snr_col]
            .parse()
            .map_err(|e| CliError::Config(format!("--measurements: row {}: {e}", i + 1)))?;
        by_label.insert(rec[label_col].to_string(), snr);
    }
    trajectory
        .points()
        .iter()
        .map(|p| {
            by_label
                .get(&p.label)
                .copied()
                .ok_or_else(|| CliError::Config(format!("--measurements: no value for point `{}`", p.label)))
        })
        .collect()
}

pub fn replay(args: &ReplayArgs, out: &mut dyn Write) -> CliResult<()> {
    let ple = parse_list_f64("ple", &args.ple)?;
    if let Some(p) = ple.iter().find(|p| !(1.0..=4.0).contains(*p)) {
        return Err(CliError::Config(format!("--ple: must lie in [1, 4], got {p}")));
    }
    if args.workers == Some(0) {
        return Err(CliError::Config("--workers: must be >= 1".into()));
    }
    let (scenario, scenario_source) = match &args.scenario {
        Some(p) => {
            let s: ReplayScenario = serde_json::from_str(&read_input(p, "--scenario")?)
                .map_err(|e| CliError::config("--scenario", e))?;
            s.validate().map_err(|e| CliError::config("--scenario", e))?;
            (s, "file".to_string())
        }
        None => (ReplayScenario::rooftop_example(), "builtin:rooftop_example".to_string()),
    };
    let (trajectory, trajectory_source) = match &args.trajectory {
        Some(p) => {
            let t = Trajectory::read_csv(read_input(p, "--trajectory")?.as_bytes())
                .map_err(|e| CliError::config("--trajectory", e))?;
            (t, "file".to_string())
        }
        None => (replay::rooftop_example_trajectory(), "builtin:rooftop_example".to_string()),
    };
    let measured = match &args.measurements {
        Some(p) => Some(read_measurements(p, &trajectory)?),
        None => trajectory.measurements(),
    };
    let run = || replay::replay(&scenario, &trajectory, &ple);
    let curves = match args.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::runtime("thread pool", e))?
            .install(run),
        None => run(),
    }
    .map_err(rt("replay"))?;

    let config = ReplayConfig {
        scenario: &scenario,
        scenario_source,
        trajectory_source,
        measurements_source: args.measurements.as_ref().map(|_| "file".to_string()),
        ple: &ple,
    };
    let prov = Provenance::new(
        TOOL_VERSION,
        serde_json::to_value(&config).map_err(|e| CliError::runtime("serializing config", e))?,
    );
    let dir: &PathBuf = &args.out.out;
    write_atomic(&dir.join("replay_curves.csv"), |w| {
        report::write_replay_csv(w, &prov, &trajectory, scenario.ris_center, &curves).map_err(rt("writing replay CSV"))
    })?;
    let entries = curves
        .iter()
        .map(|c| {
            let finite: Vec<f64> = c.snr_db_per_point.iter().map(|d| d.0).filter(|v| v.is_finite()).collect();
            let mean = if finite.is_empty() {
                f64::NEG_INFINITY
            } else {
                finite.iter().sum::<f64>() / finite.len() as f64
            };
            let comparison = match &measured {
                Some(m) => Some(replay::compare_with_measurements(c, m).map_err(rt("comparing measurements"))?),
                None => None,
            };
            Ok(ReplayStatsEntry {
                ple: c.ple,
                mean_snr_db: Decibel(mean),
                shadowed_points: c.snr_db_per_point.len() - finite.len(),
                comparison,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let stats = ReplayStats {
        provenance: prov,
        kind: "replay_stats".into(),
        points: trajectory.len(),
        measurements_present: measured.is_some(),
        curves: entries,
    };
    write_json(&dir.join("replay_stats.json"), &stats)?;
    let io = |e: std::io::Error| CliError::runtime("writing stdout", e);
    writeln!(out, "{} points -> {}", trajectory.len(), dir.display()).map_err(io)?;
    writeln!(out, "{:>6}  {:>12}  {:>8}  {:>8}  {:>8}", "ple", "mean SNR[dB]", "bias", "rmse", "spearman").map_err(io)?;
    for e in &stats.curves {
        let (b, r, s) = match &e.comparison {
            Some(c) => (
                format!("{:.2}", c.bias_db),
                format!("{:.2}", c.rmse_db),
                c.spearman.map_or("n/a".into(), |s| format!("{s:.3}")),
            ),
            None => ("-".into(), "-".into(), "-".into()),
        };
        writeln!(out, "{:>6}  {:>12.2}  {b:>8}  {r:>8}  {s:>8}", e.ple, e.mean_snr_db.0).map_err(io)?;
    }
    Ok(())
}
