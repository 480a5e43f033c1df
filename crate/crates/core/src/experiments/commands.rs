//! Command implementations. Each command reads a config, derives every
//! random stream from the master seed and writes plain CSV/JSON files.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::*;
use super::prep::FittedPipeline;
use crate::classify::{
    confusion_noise_classifier, perfect_classifier, random_classifier, CalibratedClassifier, ScoreInput,
};
use crate::data::{generate_cohort, load_encounters, CohortConfig, EncounterTable, FeatureKind};
use crate::domain::{ArrivalField, ClassLabel, Scenario};
use crate::error::{Error, Result};
use crate::eval::{
    ensemble_rank, feature_scores, kfold_cv, paired_5x2_ttest, pr_curve, roc_curve, roc_permutation_test,
    write_curve_csv, CvSummary,
};
use crate::seed::derive_seed;
use crate::sim::{
    build_report, load_sim_patients, run_simulation, write_sim_patients, write_trace_csv, Departure, SimOutcome,
    SimPatient, SimReport,
};
use crate::stats::{mean, percentile_linear, sample_std};

/// Command-line overrides shared by every command.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub replications: Option<usize>,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            ..Self::default()
        }
    }

    fn master(&self, config_seed: u64) -> u64 {
        self.seed.unwrap_or(config_seed)
    }

    fn replications(&self, configured: Option<usize>, stochastic: bool) -> Result<usize> {
        let n = self.replications.or(configured).unwrap_or(if stochastic { 30 } else { 1 });
        if n == 0 {
            return Err(Error::config("replications", "must be at least 1"));
        }
        Ok(n)
    }

    fn prepare_out(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out)?;
        Ok(&self.out)
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::data(format!("{}: {e}", path.display())))
}

/// Loads the encounter table for replication `rep`. Synthetic cohorts are
/// regenerated per replication from the master seed; files are fixed.
fn load_table(source: &DataSource, master: u64, path: &str) -> Result<EncounterTable> {
    match source {
        DataSource::Cohort { cohort } => generate_cohort(&CohortConfig {
            seed: derive_seed(master, path),
            ..cohort.clone()
        }),
        DataSource::Encounters { path, schema } => load_encounters(open(path)?, schema),
        DataSource::SimPatients { .. } => Err(Error::config("data.source", "expected an encounter source")),
    }
}

/// Simulator input with `predicted_label` set to the truth.
pub fn sim_patients_from_table(table: &EncounterTable, arrival: ArrivalField, threshold: f64) -> Result<Vec<SimPatient>> {
    let labels = table.labels(threshold)?;
    Ok(table
        .records
        .iter()
        .zip(labels)
        .map(|(r, y)| SimPatient {
            encounter_id: r.encounter_id.clone(),
            arrival_time: match arrival {
                ArrivalField::TriageTime => r.triage_time,
                ArrivalField::AdmitDecisionTime => r.admit_decision_time,
            },
            los_hours: r.los_hours,
            true_label: y,
            predicted_label: y,
        })
        .collect())
}

/// One replication's patient stream before classification, plus the table
/// it came from when a trained classifier needs features.
struct Stream {
    table: Option<EncounterTable>,
    patients: Vec<SimPatient>,
}

fn load_stream(source: &DataSource, master: u64, rep: usize, scenario: &Scenario, threshold: f64) -> Result<Stream> {
    if let DataSource::SimPatients { path } = source {
        return Ok(Stream {
            table: None,
            patients: load_sim_patients(open(path)?)?,
        });
    }
    let table = load_table(source, master, &format!("rep{rep}/cohort"))?;
    let patients = sim_patients_from_table(&table, scenario.arrival_field, threshold)?;
    Ok(Stream {
        table: Some(table),
        patients,
    })
}

fn relabel(patients: &[SimPatient], clf: &CalibratedClassifier) -> Result<Vec<SimPatient>> {
    let ids: Vec<String> = patients.iter().map(|p| p.encounter_id.clone()).collect();
    let truth: Vec<ClassLabel> = patients.iter().map(|p| p.true_label).collect();
    let pred = clf.predict(&ScoreInput {
        ids: &ids,
        features: None,
        truth: Some(&truth),
    })?;
    Ok(patients
        .iter()
        .zip(pred)
        .map(|(p, l)| SimPatient {
            predicted_label: l,
            ..p.clone()
        })
        .collect())
}

/// Applies `spec` with the replication's classifier seed. Trained models
/// learn on the earliest encounters and only the remainder is simulated.
fn classify(spec: &ClassifierSpec, stream: &Stream, seed: u64, threshold: f64) -> Result<Vec<SimPatient>> {
    match spec {
        ClassifierSpec::Given => match stream.table {
            None => Ok(stream.patients.clone()),
            Some(_) => Err(Error::config("classifier.kind", "`given` needs a sim_patients source")),
        },
        ClassifierSpec::Perfect => relabel(&stream.patients, &perfect_classifier()),
        ClassifierSpec::Random { p_ls } => relabel(&stream.patients, &random_classifier(*p_ls, seed)?),
        ClassifierSpec::ConfusionNoise { fp_rate, fn_rate } => {
            relabel(&stream.patients, &confusion_noise_classifier(*fp_rate, *fn_rate, seed)?)
        }
        ClassifierSpec::Trained {
            trainer,
            train_fraction,
            preprocess,
        } => {
            let table = stream
                .table
                .as_ref()
                .ok_or_else(|| Error::config("classifier.kind", "`trained` needs an encounter source"))?;
            let mut order: Vec<usize> = (0..table.len()).collect();
            order.sort_by(|&a, &b| table.records[a].triage_time.total_cmp(&table.records[b].triage_time));
            let cut = ((table.len() as f64) * train_fraction).round() as usize;
            if cut == 0 || cut >= table.len() {
                return Err(Error::data("train_fraction leaves an empty train or test split"));
            }
            let (mut train_rows, mut test_rows) = (order[..cut].to_vec(), order[cut..].to_vec());
            train_rows.sort_unstable();
            test_rows.sort_unstable();
            let train = table.select_rows(&train_rows);
            let test = table.select_rows(&test_rows);
            let pipe = FittedPipeline::fit(&train, preprocess)?;
            let clf = trainer.fit(&pipe.dataset(&train, threshold)?, seed)?;
            let test_ds = pipe.dataset(&test, threshold)?;
            let pred = clf.predict(&ScoreInput::from_dataset(&test_ds))?;
            Ok(test_rows
                .iter()
                .zip(pred)
                .map(|(&row, l)| SimPatient {
                    predicted_label: l,
                    ..stream.patients[row].clone()
                })
                .collect())
        }
    }
}

/// Cross-checks a finished run against the simulator's accounting identities.
fn check_invariants(scenario: &Scenario, outcome: &SimOutcome, report: &SimReport) -> Result<()> {
    let n = outcome.patients.len() as u64;
    let departed = report.discharged_from_gw + report.discharged_from_ssu + report.wa_discharge_count;
    if departed + report.in_system_at_horizon + report.not_arrived_by_horizon != n {
        return Err(Error::Invariant(format!("{departed} departures do not account for {n} patients")));
    }
    if report.total_sterilizations != report.gw_sterilizations + report.ssu_sterilizations + report.wa_sterilizations
    {
        return Err(Error::Invariant("sterilization totals do not add up".into()));
    }
    if matches!(scenario.horizon, crate::domain::Horizon::Drain)
        && outcome.patients.iter().any(|p| p.departure == Departure::InSystem)
    {
        return Err(Error::Invariant("drain run ended with patients still in the system".into()));
    }
    Ok(())
}

fn simulate_once(scenario: &Scenario, patients: &[SimPatient]) -> Result<(SimOutcome, SimReport)> {
    let outcome = run_simulation(scenario, patients)?;
    let report = build_report(&outcome)?;
    check_invariants(scenario, &outcome, &report)?;
    Ok((outcome, report))
}

fn scenario_for_rep(base: &Scenario, master: u64, rep: usize) -> Scenario {
    Scenario {
        seed: derive_seed(master, &format!("rep{rep}/sterilization")),
        ..base.clone()
    }
}

fn classifier_seed(master: u64, rep: usize) -> u64 {
    derive_seed(master, &format!("rep{rep}/classifier"))
}

/// Metric names in emission order.
fn sorted_metrics(report: &SimReport) -> Vec<(&'static str, Option<f64>)> {
    let mut m = report.metrics();
    m.sort_by_key(|(name, _)| *name);
    m
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationSummary {
    pub replications: usize,
    /// Replications in which the metric was defined.
    pub defined: BTreeMap<String, usize>,
    pub mean: BTreeMap<String, Option<f64>>,
    pub std: BTreeMap<String, Option<f64>>,
}

pub fn summarize_reports(reports: &[SimReport]) -> ReplicationSummary {
    let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in reports {
        for (name, v) in r.metrics() {
            let e = values.entry(name.to_string()).or_default();
            if let Some(v) = v {
                e.push(v);
            }
        }
    }
    ReplicationSummary {
        replications: reports.len(),
        defined: values.iter().map(|(k, v)| (k.clone(), v.len())).collect(),
        mean: values.iter().map(|(k, v)| (k.clone(), mean(v))).collect(),
        std: values
            .iter()
            .map(|(k, v)| (k.clone(), if v.len() == 1 { Some(0.0) } else { sample_std(v) }))
            .collect(),
    }
}

pub fn cmd_simulate(cfg: &SimulateConfig, opts: &RunOptions) -> Result<ReplicationSummary> {
    cfg.validate()?;
    let master = opts.master(cfg.seed);
    let reps = opts.replications(cfg.replications, cfg.classifier.is_stochastic())?;
    let out = opts.prepare_out()?;
    let mut reports = Vec::with_capacity(reps);
    for rep in 0..reps {
        let scenario = scenario_for_rep(&cfg.scenario, master, rep);
        let stream = load_stream(&cfg.data, master, rep, &scenario, cfg.label_threshold_hours)?;
        let patients = classify(&cfg.classifier, &stream, classifier_seed(master, rep), cfg.label_threshold_hours)?;
        let (outcome, report) = simulate_once(&scenario, &patients)?;
        write_json(out, &format!("report_rep{rep:03}.json"), &report)?;
        let mut w = create(out, &format!("patients_rep{rep:03}.csv"))?;
        write_sim_patients(&mut w, &patients)?;
        if cfg.write_trace {
            let mut w = create(out, &format!("trace_rep{rep:03}.csv"))?;
            write_trace_csv(&mut w, &outcome.trace)?;
        }
        reports.push(report);
    }
    let summary = summarize_reports(&reports);
    write_json(out, "summary.json", &summary)?;
    Ok(summary)
}

/// One row of a long-format sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub key: Vec<String>,
    pub replication: usize,
    pub metric: &'static str,
    pub value: Option<f64>,
}

fn write_sweep(out: &Path, name: &str, header: &[&str], rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(out, name)?);
    w.write_record(header)?;
    for r in rows {
        let mut rec = r.key.clone();
        rec.push(r.replication.to_string());
        rec.push(r.metric.to_string());
        rec.push(cell(r.value));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn push_rows(rows: &mut Vec<SweepRow>, key: Vec<String>, rep: usize, report: &SimReport) {
    for (metric, value) in sorted_metrics(report) {
        rows.push(SweepRow {
            key: key.clone(),
            replication: rep,
            metric,
            value,
        });
    }
}

/// Rows are ordered grid point, classifier, replication, metric name.
pub fn cmd_capacity_sweep(cfg: &CapacitySweepConfig, opts: &RunOptions) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let master = opts.master(cfg.seed);
    let stochastic = cfg.classifiers.iter().any(|c| c.classifier.is_stochastic());
    let reps = opts.replications(cfg.replications, stochastic)?;
    let out = opts.prepare_out()?;
    // [grid][classifier][rep]
    let mut reports = vec![vec![Vec::with_capacity(reps); cfg.classifiers.len()]; cfg.grid.len()];
    for rep in 0..reps {
        let base = scenario_for_rep(&cfg.scenario, master, rep);
        let stream = load_stream(&cfg.data, master, rep, &base, cfg.label_threshold_hours)?;
        let seed = classifier_seed(master, rep);
        for (c, named) in cfg.classifiers.iter().enumerate() {
            let patients = classify(&named.classifier, &stream, seed, cfg.label_threshold_hours)?;
            for (g, point) in cfg.grid.iter().enumerate() {
                let scenario = Scenario {
                    gw_capacity: point.gw,
                    ssu_capacity: point.ssu,
                    ..base.clone()
                };
                reports[g][c].push(simulate_once(&scenario, &patients)?.1);
            }
        }
    }
    let mut rows = Vec::new();
    for (g, point) in cfg.grid.iter().enumerate() {
        for (c, named) in cfg.classifiers.iter().enumerate() {
            for (rep, report) in reports[g][c].iter().enumerate() {
                let key = vec![point.gw.to_string(), point.ssu.to_string(), named.name.clone()];
                push_rows(&mut rows, key, rep, report);
            }
        }
    }
    write_sweep(
        out,
        "capacity_sweep.csv",
        &["gw_cap", "ssu_cap", "classifier", "replication", "metric", "value"],
        &rows,
    )?;
    Ok(rows)
}

/// Rows are ordered pair, replication, metric name. Every pair reuses the
/// same per-patient noise draws, so pairs differ only through their rates.
pub fn cmd_fpfn_sweep(cfg: &FpFnSweepConfig, opts: &RunOptions) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let master = opts.master(cfg.seed);
    let reps = opts.replications(cfg.replications, true)?;
    let out = opts.prepare_out()?;
    let mut reports = vec![Vec::with_capacity(reps); cfg.pairs.len()];
    for rep in 0..reps {
        let scenario = scenario_for_rep(&cfg.scenario, master, rep);
        let stream = load_stream(&cfg.data, master, rep, &scenario, cfg.label_threshold_hours)?;
        let seed = classifier_seed(master, rep);
        for (i, pair) in cfg.pairs.iter().enumerate() {
            let spec = ClassifierSpec::ConfusionNoise {
                fp_rate: pair.fp_rate,
                fn_rate: pair.fn_rate,
            };
            let patients = classify(&spec, &stream, seed, cfg.label_threshold_hours)?;
            reports[i].push(simulate_once(&scenario, &patients)?.1);
        }
    }
    let mut rows = Vec::new();
    for (pair, reps) in cfg.pairs.iter().zip(&reports) {
        for (rep, report) in reps.iter().enumerate() {
            let key = vec![
                format!("{}", pair.fp_rate),
                format!("{}", pair.fn_rate),
                cfg.scenario.gw_capacity.to_string(),
                cfg.scenario.ssu_capacity.to_string(),
            ];
            push_rows(&mut rows, key, rep, report);
        }
    }
    write_sweep(
        out,
        "fpfn_sweep.csv",
        &["fp_rate", "fn_rate", "gw_cap", "ssu_cap", "replication", "metric", "value"],
        &rows,
    )?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseTest {
    pub model_a: String,
    pub model_b: String,
    pub t_statistic: f64,
    pub t_test_p: f64,
    pub auc_a: f64,
    pub auc_b: f64,
    pub permutation_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineOutput {
    pub rows: usize,
    pub features: Vec<String>,
    pub models: BTreeMap<String, CvSummary>,
    pub tests: Vec<PairwiseTest>,
}

/// Preprocessing is fit once on the full table, then every trainer is
/// cross-validated on identical folds.
pub fn cmd_pipeline(cfg: &PipelineConfig, opts: &RunOptions) -> Result<PipelineOutput> {
    cfg.validate()?;
    let master = opts.master(cfg.seed);
    let out = opts.prepare_out()?;
    let table = load_table(&cfg.data, master, "cohort")?;
    let pipe = FittedPipeline::fit(&table, &cfg.preprocess)?;
    let processed = pipe.transform(&table)?;
    let data = processed.to_dataset(crate::domain::DEFAULT_LOS_THRESHOLD_HOURS)?;

    let scores = feature_scores(&processed, &data.y, cfg.mi_bins)?;
    let mut w = csv::Writer::from_writer(create(out, "feature_scores.csv")?);
    w.write_record(["feature", "pearson", "spearman", "cramers_v", "chi_square", "f_statistic", "mutual_information"])?;
    for f in &scores.features {
        w.write_record([
            f.name.clone(),
            cell(f.pearson),
            cell(f.spearman),
            cell(f.cramers_v),
            cell(f.chi_square),
            cell(f.f_statistic),
            cell(f.mutual_information),
        ])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_writer(create(out, "feature_ranking.csv")?);
    w.write_record(["ensemble_rank", "feature", "mean_rank"])?;
    for r in ensemble_rank(&scores)? {
        w.write_record([r.ensemble_rank.to_string(), r.name, format!("{}", r.mean_rank)])?;
    }
    w.flush()?;

    let cv_seed = derive_seed(master, "pipeline/cv");
    let mut models = BTreeMap::new();
    let mut summary = csv::Writer::from_writer(create(out, "cv_summary.csv")?);
    summary.write_record(["model", "metric", "mean", "std"])?;
    for t in &cfg.trainers {
        let cv = kfold_cv(&t.trainer, &data, cfg.k, cv_seed, cfg.resampling)?;
        write_json(out, &format!("cv_{}.json", t.name), &cv)?;
        write_curve_csv(create(out, &format!("roc_{}.csv", t.name))?, &roc_curve(&cv.oof_scores, &data.y)?)?;
        write_curve_csv(create(out, &format!("pr_{}.csv", t.name))?, &pr_curve(&cv.oof_scores, &data.y)?)?;
        for (metric, m) in &cv.mean {
            summary.write_record([t.name.clone(), metric.clone(), format!("{m}"), format!("{}", cv.std[metric])])?;
        }
        models.insert(t.name.clone(), cv);
    }
    summary.flush()?;

    let mut tests = Vec::new();
    for (i, a) in cfg.trainers.iter().enumerate() {
        for b in &cfg.trainers[i + 1..] {
            let tt = paired_5x2_ttest(&a.trainer, &b.trainer, &data, derive_seed(master, "pipeline/5x2"), cfg.ttest_metric)?;
            let (sa, sb) = (&models[&a.name].oof_scores, &models[&b.name].oof_scores);
            let p = roc_permutation_test(sa, sb, &data.y, cfg.permutations, derive_seed(master, "pipeline/permutation"))?;
            tests.push(PairwiseTest {
                model_a: a.name.clone(),
                model_b: b.name.clone(),
                t_statistic: tt.t,
                t_test_p: tt.p,
                auc_a: crate::eval::auc_rank(sa, &data.y)?,
                auc_b: crate::eval::auc_rank(sb, &data.y)?,
                permutation_p: p,
            });
        }
    }
    write_json(out, "tests.json", &tests)?;
    Ok(PipelineOutput {
        rows: data.len(),
        features: data.feature_names.clone(),
        models,
        tests,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureSummary {
    pub feature: String,
    pub kind: FeatureKind,
    pub count: usize,
    pub missing: usize,
    pub missing_ratio: f64,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    /// min, q25, median, q75, max of observed numeric values.
    pub quantiles: Option<[f64; 5]>,
    /// Category frequencies, most frequent first then by name.
    pub categories: Vec<(String, usize)>,
}

pub fn summarize_table(table: &EncounterTable) -> Vec<FeatureSummary> {
    table
        .columns
        .iter()
        .map(|c| {
            let n = c.values.len();
            let missing = c.missing_count();
            let mut observed: Vec<f64> = c.numeric_values().into_iter().flatten().collect();
            observed.sort_by(f64::total_cmp);
            let quantiles = (c.meta.kind == FeatureKind::Numeric && !observed.is_empty()).then(|| {
                [0.0, 0.25, 0.5, 0.75, 1.0].map(|q| percentile_linear(&observed, q).expect("non-empty"))
            });
            let mut counts: BTreeMap<String, usize> = BTreeMap::new();
            for v in &c.values {
                if let Some(cat) = v.as_category() {
                    *counts.entry(cat.to_string()).or_default() += 1;
                }
            }
            let mut categories: Vec<(String, usize)> = counts.into_iter().collect();
            categories.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            let numeric = c.meta.kind == FeatureKind::Numeric;
            FeatureSummary {
                feature: c.meta.name.clone(),
                kind: c.meta.kind,
                count: n - missing,
                missing,
                missing_ratio: if n == 0 { 0.0 } else { missing as f64 / n as f64 },
                mean: if numeric { mean(&observed) } else { None },
                std: match observed.len() {
                    _ if !numeric => None,
                    0 => None,
                    1 => Some(0.0),
                    _ => sample_std(&observed),
                },
                quantiles,
                categories,
            }
        })
        .collect()
}

pub fn cmd_summarize(cfg: &SummarizeConfig, opts: &RunOptions) -> Result<Vec<FeatureSummary>> {
    cfg.validate()?;
    let master = opts.master(cfg.seed);
    let out = opts.prepare_out()?;
    let table = load_table(&cfg.data, master, "cohort")?;
    let summary = summarize_table(&table);
    let mut w = csv::Writer::from_writer(create(out, "feature_summary.csv")?);
    w.write_record([
        "feature", "kind", "count", "missing", "missing_ratio", "mean", "std", "min", "q25", "median", "q75", "max",
        "categories",
    ])?;
    for s in &summary {
        let q = |i: usize| cell(s.quantiles.map(|q| q[i]));
        let cats = s
            .categories
            .iter()
            .map(|(c, n)| format!("{c}:{n}"))
            .collect::<Vec<_>>()
            .join(";");
        let kind = match s.kind {
            FeatureKind::Numeric => "numeric",
            FeatureKind::Categorical => "categorical",
        };
        w.write_record([
            s.feature.clone(),
            kind.to_string(),
            s.count.to_string(),
            s.missing.to_string(),
            format!("{}", s.missing_ratio),
            cell(s.mean),
            cell(s.std),
            q(0),
            q(1),
            q(2),
            q(3),
            q(4),
            cats,
        ])?;
    }
    w.flush()?;

    let labels = table.labels(cfg.label_threshold_hours)?;
    let ls = labels.iter().filter(|l| l.is_ls()).count();
    let n = labels.len().max(1) as f64;
    let mut w = csv::Writer::from_writer(create(out, "label_balance.csv")?);
    w.write_record(["label", "count", "fraction"])?;
    for (label, count) in [(ClassLabel::Ls, ls), (ClassLabel::Ss, labels.len() - ls)] {
        w.write_record([label.to_string(), count.to_string(), format!("{}", count as f64 / n)])?;
    }
    w.flush()?;
    Ok(summary)
}

/// `--seed` replaces the cohort's own seed.
pub fn cmd_generate_cohort(cfg: &CohortConfig, opts: &RunOptions) -> Result<EncounterTable> {
    let cfg = CohortConfig {
        seed: opts.seed.unwrap_or(cfg.seed),
        ..cfg.clone()
    };
    let out = opts.prepare_out()?;
    let table = generate_cohort(&cfg)?;
    let w = create(out, "cohort.csv")?;
    crate::data::write_encounters(&table, w)?;
    write_json(out, "cohort_config.json", &cfg)?;
    Ok(table)
}
