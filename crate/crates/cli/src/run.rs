//! Command implementations: pipeline assembly, artifact writing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

use venuesim_core::engine::{
    aggregate, run_metrics, run_simulation, sweep, AggregateRow, SimData, SimulatedVisit,
    SimulationConfig, SweepSpec,
};
use venuesim_core::ingest::{
    apply_hierarchy, load_category_hierarchy, load_checkins, preprocess, split, subsample_users,
    Dataset, LoadReport, RowPolicy, SplitSpec,
};
use venuesim_core::metrics::{
    collective_gini, decile_report, lorenz, mean_individual_gini, novel_pairs, rank_size,
    visit_counts_per_venue,
};
use venuesim_core::mobility::ExplorationPolicy;
use venuesim_core::recsys::{build_interactions, evaluate, event_pairs, train, TrainingHyper};
use venuesim_core::rng::RngStreams;
use venuesim_core::types::UserId;
use venuesim_core::{Timestamp, VisitEvent};

use crate::config::ExperimentSpec;

pub fn install_worker_pool(workers: usize) {
    if workers > 0 {
        // best effort: the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
}

/// load → preprocess → optional user subsample.
pub fn load_dataset(spec: &ExperimentSpec) -> Result<(Dataset, LoadReport)> {
    let path = spec
        .data
        .as_ref()
        .context("no input data file (set --data or the `data` config key)")?;
    let (raw, report) = load_checkins(path, spec.parsed_format()?, RowPolicy::Skip)
        .with_context(|| format!("loading {}", path.display()))?;
    eprintln!(
        "loaded {} events from {} rows ({} skipped)",
        report.loaded, report.rows, report.skipped
    );
    let mut d = preprocess(&raw, &spec.exclusions);
    eprintln!(
        "after preprocessing: {} events, {} users, {} venues, {} categories",
        d.events.len(),
        d.users.len(),
        d.catalog.len(),
        d.catalog.categories().len()
    );
    if let Some(h) = &spec.hierarchy {
        let map = load_category_hierarchy(h)
            .with_context(|| format!("loading hierarchy {}", h.display()))?;
        apply_hierarchy(&mut d.catalog, &map);
        eprintln!("applied {}-entry category hierarchy", map.len());
    }
    if let Some(n) = spec.subsample {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
            RngStreams::new(spec.seed).derive("subsample", n as u64),
        );
        d = subsample_users(&d, n, &mut rng, spec.keep_full_catalog)?;
        eprintln!(
            "subsampled to {} users ({} events)",
            d.users.len(),
            d.events.len()
        );
    }
    Ok((d, report))
}

pub fn prepare_simdata(spec: &ExperimentSpec) -> Result<SimData> {
    let (d, _) = load_dataset(spec)?;
    let (train_d, post_d) = split(
        &d,
        SplitSpec {
            t_train_days: spec.t_train_days,
            t_max_days: spec.t_max_days,
        },
    )?;
    if post_d.events.is_empty() {
        eprintln!("warning: post split is empty; nothing to simulate");
    }
    eprintln!(
        "split: {} train events, {} post events",
        train_d.events.len(),
        post_d.events.len()
    );
    Ok(SimData::prepare(&train_d, &post_d, spec.parsed_jump_scope()?)?)
}

pub fn base_config(spec: &ExperimentSpec) -> Result<SimulationConfig> {
    Ok(SimulationConfig {
        eta: 0.0,
        delta_days: spec.delta_days,
        algorithm: spec.parsed_algos()?[0],
        top_k: spec.top_k,
        policy: ExplorationPolicy {
            mode: spec.parsed_explore_mode()?,
            rho: spec.rho,
            gamma: spec.gamma,
        },
        anchor: spec.parsed_anchor()?,
        seed: spec.seed,
        hyper: TrainingHyper::default(),
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cell_stem(algorithm: &str, eta: f64, run: u32) -> String {
    format!("{algorithm}_eta{eta}_run{run}")
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(
        "eta,algorithm,runs,failed,\
         mean_individual_gini_mean,mean_individual_gini_std,\
         collective_gini_mean,collective_gini_std,\
         alpha_mean,alpha_std,\
         richclub_density_mean,richclub_density_std,\
         peripheral_density_mean,peripheral_density_std,\
         median_degree_mean,median_degree_std\n",
    );
    for r in rows {
        let pair = |p: Option<(f64, f64)>| {
            (
                fmt_opt(p.map(|x| x.0)),
                fmt_opt(p.map(|x| x.1)),
            )
        };
        let (g1m, g1s) = pair(r.mean_individual_gini);
        let (g2m, g2s) = pair(r.collective_gini);
        let (am, as_) = pair(r.alpha);
        let (rm, rs) = pair(r.richclub_density);
        let (pm, ps) = pair(r.peripheral_density);
        let (dm, ds) = pair(r.median_degree);
        let _ = writeln!(
            out,
            "{},{},{},{},{g1m},{g1s},{g2m},{g2s},{am},{as_},{rm},{rs},{pm},{ps},{dm},{ds}",
            r.eta, r.algorithm, r.runs, r.failed
        );
    }
    out
}

fn lorenz_csv(counts: &[f64]) -> Result<String> {
    let mut out = String::from("cum_venue_share,cum_visit_share\n");
    for (x, y) in lorenz(counts)? {
        let _ = writeln!(out, "{x},{y}");
    }
    Ok(out)
}

fn ranksize_csv(data: &SimData, events: &[VisitEvent]) -> String {
    let mut out = String::from("rank,venue_id,visits\n");
    for (rank, venue, visits) in rank_size(&visit_counts_per_venue(events)) {
        let _ = writeln!(out, "{rank},{},{visits}", data.catalog.venue(venue).id);
    }
    out
}

fn degree_hist_csv(events: &[VisitEvent], windows: &[(Timestamp, Timestamp)]) -> String {
    let net = venuesim_core::metrics::colocation(events, windows);
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for d in net.degrees() {
        *hist.entry(d).or_insert(0) += 1;
    }
    let n = net.node_count().max(1) as f64;
    let mut out = String::from("degree,nodes,p\n");
    for (k, cnt) in hist {
        let _ = writeln!(out, "{k},{cnt},{}", cnt as f64 / n);
    }
    out
}

fn deciles_csv(data: &SimData, visits: &[SimulatedVisit]) -> Result<String> {
    let train_pairs: Vec<(UserId, _)> = data.train.iter().map(|e| (e.user, e.venue)).collect();
    let sim_pairs = visits.iter().map(|v| (v.user, v.venue));
    let novel = novel_pairs(&data.train, sim_pairs);
    let report = decile_report(&train_pairs, &novel, 3)?;
    let mut out = String::from("decile,train_share,exploration_share,delta\n");
    for g in 0..10 {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            g + 1,
            report.train_share[g],
            report.exploration_share[g],
            report.delta[g]
        );
    }
    Ok(out)
}

fn jump_csv(data: &SimData) -> String {
    let mut out = String::from("jump_km\n");
    for s in data.jump.samples() {
        let _ = writeln!(out, "{s}");
    }
    out
}

/// `simulate`: one (eta, algorithm) cell.
pub fn cmd_simulate(spec: &ExperimentSpec) -> Result<()> {
    spec.validate()?;
    install_worker_pool(spec.workers);
    if spec.etas.len() != 1 || spec.algos.len() != 1 {
        bail!(
            "simulate runs a single cell: pass exactly one --eta and one --algo \
             (got {} etas, {} algos); use `sweep` for grids",
            spec.etas.len(),
            spec.algos.len()
        );
    }
    let data = prepare_simdata(spec)?;
    let mut cfg = base_config(spec)?;
    cfg.eta = spec.etas[0];

    let (visits, meta) = run_simulation(&data, &cfg)?;
    let metrics = run_metrics(&cfg, &visits, &meta, spec.rich_h);
    let stem = cell_stem(&cfg.algorithm.to_string(), cfg.eta, 0);

    let out = &spec.out;
    write(
        &out.join(format!("visits/{stem}.csv")),
        &venuesim_core::engine::visits_csv(&data, &visits),
    )?;
    write(
        &out.join(format!("metrics/{stem}.json")),
        &serde_json::to_string_pretty(&metrics)?,
    )?;
    write(
        &out.join(format!("meta/{stem}.json")),
        &serde_json::to_string_pretty(&meta)?,
    )?;
    write_plotdata(out, &stem, &data, &visits, &meta.epoch_windows)?;
    write(&out.join("plotdata/jump_lengths.csv"), &jump_csv(&data))?;
    eprintln!(
        "simulate done: {} visits, {} retrainings, modes {:?}",
        visits.len(),
        meta.retrain_count,
        meta.mode_counts
    );
    println!("{}", serde_json::to_string_pretty(&metrics)?);
    Ok(())
}

fn write_plotdata(
    out: &Path,
    stem: &str,
    data: &SimData,
    visits: &[SimulatedVisit],
    windows: &[(Timestamp, Timestamp)],
) -> Result<()> {
    let events: Vec<VisitEvent> = visits.iter().map(|v| v.as_event()).collect();
    if events.is_empty() {
        return Ok(());
    }
    let counts: Vec<f64> = visit_counts_per_venue(&events)
        .iter()
        .map(|&(_, c)| c as f64)
        .collect();
    if let Ok(csv) = lorenz_csv(&counts) {
        write(&out.join(format!("plotdata/lorenz_{stem}.csv")), &csv)?;
    }
    write(
        &out.join(format!("plotdata/ranksize_{stem}.csv")),
        &ranksize_csv(data, &events),
    )?;
    write(
        &out.join(format!("plotdata/degreehist_{stem}.csv")),
        &degree_hist_csv(&events, windows),
    )?;
    match deciles_csv(data, visits) {
        Ok(csv) => write(&out.join(format!("plotdata/deciles_{stem}.csv")), &csv)?,
        Err(e) => eprintln!("note: no decile report for {stem}: {e}"),
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct ManifestCell {
    eta: f64,
    algorithm: String,
    run_index: u32,
    seed: u64,
    status: String,
    visits_csv: String,
    metrics_json: String,
}

#[derive(serde::Serialize)]
struct Manifest {
    format_version: u32,
    spec: ExperimentSpec,
    config_sha256: String,
    cells: Vec<ManifestCell>,
    aggregate_csv: String,
    failed_cells: u32,
}

/// `sweep`: the full eta × algorithm × runs grid.
pub fn cmd_sweep(spec: &ExperimentSpec) -> Result<()> {
    spec.validate()?;
    install_worker_pool(spec.workers);
    let data = prepare_simdata(spec)?;
    let base = base_config(spec)?;
    let sweep_spec = SweepSpec {
        etas: spec.etas.clone(),
        algorithms: spec.parsed_algos()?,
        runs: spec.runs,
        base,
        rich_h: spec.rich_h,
    };

    let out = spec.out.clone();
    fs::create_dir_all(&out)?;
    let sink_err: Mutex<Option<anyhow::Error>> = Mutex::new(None);
    let results = sweep(&data, &sweep_spec, |cell, visits| {
        if cell.error.is_none() {
            let stem = cell_stem(&cell.algorithm, cell.eta, cell.run_index);
            let persist = || -> Result<()> {
                write(
                    &out.join(format!("visits/{stem}.csv")),
                    &venuesim_core::engine::visits_csv(&data, visits),
                )?;
                if let Some(m) = &cell.metrics {
                    write(
                        &out.join(format!("metrics/{stem}.json")),
                        &serde_json::to_string_pretty(m)?,
                    )?;
                }
                if let Some(meta) = &cell.meta {
                    write(
                        &out.join(format!("meta/{stem}.json")),
                        &serde_json::to_string_pretty(meta)?,
                    )?;
                    if cell.run_index == 0 {
                        write_plotdata(&out, &stem, &data, visits, &meta.epoch_windows)?;
                    }
                }
                Ok(())
            };
            if let Err(e) = persist() {
                sink_err.lock().unwrap().get_or_insert(e);
            }
        }
        eprintln!(
            "cell {} eta={} run={} → {}",
            cell.algorithm,
            cell.eta,
            cell.run_index,
            cell.error.as_deref().unwrap_or("ok")
        );
    });
    if let Some(e) = sink_err.into_inner().unwrap() {
        return Err(e);
    }

    let rows = aggregate(&results);
    write(&out.join("aggregate.csv"), &aggregate_csv(&rows))?;
    write(&out.join("plotdata/jump_lengths.csv"), &jump_csv(&data))?;

    let spec_json = serde_json::to_string(spec)?;
    let config_sha256 = hex_digest(spec_json.as_bytes());
    let failed = results.iter().filter(|r| r.error.is_some()).count() as u32;
    let manifest = Manifest {
        format_version: 1,
        spec: spec.clone(),
        config_sha256,
        cells: results
            .iter()
            .map(|r| {
                let stem = cell_stem(&r.algorithm, r.eta, r.run_index);
                ManifestCell {
                    eta: r.eta,
                    algorithm: r.algorithm.clone(),
                    run_index: r.run_index,
                    seed: r.seed,
                    status: r.error.clone().unwrap_or_else(|| "ok".to_string()),
                    visits_csv: format!("visits/{stem}.csv"),
                    metrics_json: format!("metrics/{stem}.json"),
                }
            })
            .collect(),
        aggregate_csv: "aggregate.csv".to_string(),
        failed_cells: failed,
    };
    write(
        &out.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest)?,
    )?;
    eprintln!(
        "sweep done: {} cells, {} failed, artifacts in {}",
        results.len(),
        failed,
        out.display()
    );
    if failed > 0 {
        bail!("{failed} sweep cell(s) failed; see manifest.json");
    }
    Ok(())
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// `eval`: offline ranking evaluation of each algorithm on the split.
pub fn cmd_eval(spec: &ExperimentSpec) -> Result<()> {
    spec.validate()?;
    install_worker_pool(spec.workers);
    let (d, _) = load_dataset(spec)?;
    let (train_d, post_d) = split(
        &d,
        SplitSpec {
            t_train_days: spec.t_train_days,
            t_max_days: spec.t_max_days,
        },
    )?;
    let matrix = build_interactions(event_pairs(&train_d.events));
    let hyper = TrainingHyper::default();
    let streams = RngStreams::new(spec.seed);

    let mut out = String::from("algorithm,hitrate_at_20,mrr_at_20,evaluated_visits,skipped_visits\n");
    for kind in spec.parsed_algos()? {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
            streams.derive(&format!("eval|{kind}"), 0),
        );
        let model = train(
            kind,
            &matrix,
            &train_d.catalog,
            train_d.users.len(),
            &hyper,
            &mut rng,
        )?;
        let rep = evaluate(&model, &post_d.events, &post_d.catalog, spec.top_k);
        eprintln!(
            "{kind}: hitrate@{} = {:.4}, mrr@{} = {:.4} ({} evaluated, {} skipped)",
            spec.top_k, rep.hit_rate, spec.top_k, rep.mrr, rep.evaluated, rep.skipped
        );
        let _ = writeln!(
            out,
            "{kind},{},{},{},{}",
            rep.hit_rate, rep.mrr, rep.evaluated, rep.skipped
        );
    }
    let path = spec.out.join("evaluation.csv");
    write(&path, &out)?;
    eprintln!("wrote {}", path.display());
    print!("{out}");
    Ok(())
}

/// `subsample`: write the subsampled dataset as canonical CSV.
pub fn cmd_subsample(spec: &ExperimentSpec, n: usize, output: &Path) -> Result<()> {
    use rand::SeedableRng;
    let mut spec = spec.clone();
    spec.subsample = None; // sample exactly once, here
    let (d, _) = load_dataset(&spec)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
        RngStreams::new(spec.seed).derive("subsample", n as u64),
    );
    let sample = subsample_users(&d, n, &mut rng, spec.keep_full_catalog)?;
    write(output, &sample.canonical_csv())?;
    eprintln!(
        "wrote {} ({} users, {} events)",
        output.display(),
        sample.users.len(),
        sample.events.len()
    );
    Ok(())
}

/// `generate`: synthesize a raw check-in file plus its category hierarchy.
pub fn cmd_generate(cfg: &venuesim_core::synth::SynthConfig, out_dir: &Path) -> Result<()> {
    let out = venuesim_core::synth::generate(cfg);
    fs::create_dir_all(out_dir)?;
    let data_path = out_dir.join("checkins.tsv");
    write(&data_path, &venuesim_core::synth::raw_lines(&out.dataset))?;
    let hier_path = out_dir.join("hierarchy.csv");
    write(&hier_path, &venuesim_core::synth::hierarchy_csv(&out.hierarchy))?;
    eprintln!(
        "generated {} events / {} users / {} venues → {} and {}",
        out.dataset.events.len(),
        out.dataset.users.len(),
        out.dataset.catalog.len(),
        data_path.display(),
        hier_path.display()
    );
    Ok(())
}

/// `metrics`: recompute metrics and plot data from a simulated-visit CSV.
pub fn cmd_metrics(visits_path: &Path, spec: &ExperimentSpec) -> Result<()> {
    let text = fs::read_to_string(visits_path)
        .with_context(|| format!("reading {}", visits_path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());

    let mut venue_rows: Vec<(String, String, f64, f64)> = Vec::new();
    let mut raw_rows: Vec<(String, String, i64, u32)> = Vec::new();
    for record in reader.records() {
        let r = record?;
        if r.len() < 8 {
            bail!("visits CSV needs 8 columns, got {}", r.len());
        }
        let t = venuesim_core::ingest::parse_timestamp(&r[5])?;
        let epoch: u32 = r[7].parse().context("epoch_index")?;
        venue_rows.push((
            r[1].to_string(),
            r[2].to_string(),
            r[3].parse().context("lat")?,
            r[4].parse().context("lon")?,
        ));
        raw_rows.push((r[0].to_string(), r[1].to_string(), t, epoch));
    }
    if raw_rows.is_empty() {
        bail!("no visits in {}", visits_path.display());
    }

    let catalog = venuesim_core::Catalog::from_rows(venue_rows);
    let users = venuesim_core::UserTable::from_ids(
        raw_rows.iter().map(|(u, _, _, _)| u.clone()).collect(),
    );
    let mut windows: BTreeMap<u32, (Timestamp, Timestamp)> = BTreeMap::new();
    let events: Vec<VisitEvent> = raw_rows
        .iter()
        .map(|(u, v, t, epoch)| {
            let w = windows.entry(*epoch).or_insert((*t, *t));
            w.0 = w.0.min(*t);
            w.1 = w.1.max(*t);
            VisitEvent {
                user: users.by_name(u).expect("interned"),
                venue: catalog.venue_by_id(v).expect("interned"),
                t: *t,
                tz_offset_min: 0,
            }
        })
        .collect();
    let windows: Vec<(Timestamp, Timestamp)> = windows.into_values().collect();

    let net = venuesim_core::metrics::colocation(&events, &windows);
    #[derive(serde::Serialize)]
    struct Recomputed {
        mean_individual_gini: Option<f64>,
        collective_gini: Option<f64>,
        alpha: Option<f64>,
        richclub_density: Option<f64>,
        peripheral_density: Option<f64>,
        median_degree: Option<f64>,
        node_count: u64,
        edge_count: u64,
        gini_scope: String,
    }
    let m = Recomputed {
        mean_individual_gini: mean_individual_gini(&events).ok(),
        collective_gini: collective_gini(&events).ok(),
        alpha: venuesim_core::metrics::degree_slope(&net).ok(),
        richclub_density: venuesim_core::metrics::richclub_density(&net, spec.rich_h).ok(),
        peripheral_density: venuesim_core::metrics::peripheral_density(&net, spec.rich_h).ok(),
        median_degree: net.median_degree().map(|d| d as f64),
        node_count: net.node_count() as u64,
        edge_count: net.edge_count() as u64,
        gini_scope: "simulated_only".to_string(),
    };
    let stem = visits_path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "visits".to_string());
    let json = serde_json::to_string_pretty(&m)?;
    write(&spec.out.join(format!("metrics/{stem}.json")), &json)?;

    let counts: Vec<f64> = visit_counts_per_venue(&events)
        .iter()
        .map(|&(_, c)| c as f64)
        .collect();
    if let Ok(csv) = lorenz_csv(&counts) {
        write(&spec.out.join(format!("plotdata/lorenz_{stem}.csv")), &csv)?;
    }
    let mut rank_out = String::from("rank,venue_id,visits\n");
    for (rank, venue, visits) in rank_size(&visit_counts_per_venue(&events)) {
        let _ = writeln!(rank_out, "{rank},{},{visits}", catalog.venue(venue).id);
    }
    write(
        &spec.out.join(format!("plotdata/ranksize_{stem}.csv")),
        &rank_out,
    )?;
    write(
        &spec.out.join(format!("plotdata/degreehist_{stem}.csv")),
        &degree_hist_csv(&events, &windows),
    )?;
    println!("{json}");
    Ok(())
}
