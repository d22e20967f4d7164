use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gamma_tail::cumulants::{be_condition_ratio, berry_esseen_bound, cumulants, normalized_lower_bound};
use gamma_tail::edgeworth::build_expansion;
use gamma_tail::finite_sum::{invert_to_table, HeadCf};
use gamma_tail::io::{
    load_samples, load_spec, load_table_csv, parse_grid, save_samples, write_columns_csv, write_table_csv,
};
use gamma_tail::mc::{ks_band, ks_distance, sample, SampleMode, Target};
use gamma_tail::pipeline::{m_robustness, z_cdf, PipelineConfig};
use gamma_tail::weights::WeightsFile;
use gamma_tail::{make_power_law_normalized, DistributionTable, GammaSumSpec, SpecFile};
use serde_json::{json, Value};

use crate::manifest::{unix_now, RunManifest};
use crate::{CumulantsArgs, EdgeworthArgs, HeadArgs, McArgs, ReproArgs, ValidateArgs, ZdistArgs};

/// A checked property of the output did not hold.
#[derive(Debug, thiserror::Error)]
#[error("invariant violated: {0}")]
pub struct InvariantViolation(pub String);

/// Records outputs and warnings of one command and writes the manifests.
struct Session {
    command: &'static str,
    argv: Vec<String>,
    config: Value,
    started: f64,
    outputs: Vec<PathBuf>,
    warnings: Vec<String>,
}

impl Session {
    fn new(command: &'static str, argv: Vec<String>, config: Value) -> Self {
        Session { command, argv, config, started: unix_now(), outputs: Vec::new(), warnings: Vec::new() }
    }

    fn warn(&mut self, w: impl Into<String>) {
        let w = w.into();
        eprintln!("warning: {w}");
        self.warnings.push(w);
    }

    fn finish(self) -> Result<()> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            argv: self.argv,
            config: self.config,
            library_version: env!("CARGO_PKG_VERSION"),
            started_unix: self.started,
            finished_unix: unix_now(),
            outputs: self.outputs.clone(),
            warnings: self.warnings,
        };
        for out in &self.outputs {
            manifest.write_for(out)?;
        }
        Ok(())
    }

    /// Runs `write` against the file (recorded for the manifest) or stdout.
    fn emit(&mut self, out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        match out {
            Some(path) => {
                let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                let mut w = BufWriter::new(file);
                write(&mut w)?;
                w.flush()?;
                self.outputs.push(path.to_path_buf());
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                write(&mut lock)?;
                lock.flush()?;
            }
        }
        Ok(())
    }

    fn emit_json(&mut self, out: Option<&Path>, value: &Value) -> Result<()> {
        self.emit(out, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    fn emit_table(&mut self, out: Option<&Path>, table: &DistributionTable<f64>) -> Result<()> {
        for w in table.warnings() {
            self.warn(w.clone());
        }
        self.emit(out, |w| Ok(write_table_csv(table, w)?))
    }
}

fn spec_json(spec: &GammaSumSpec<f64>) -> Value {
    serde_json::to_value(SpecFile::from_spec(spec)).expect("spec serializes")
}

fn read_spec(path: &Path) -> Result<GammaSumSpec<f64>> {
    load_spec(path).with_context(|| format!("loading spec {}", path.display()))
}

fn cumulant_summary(spec: &GammaSumSpec<f64>, m: usize, k: usize) -> Result<Value> {
    let tc = cumulants(spec, m, k)?;
    let kappa: Vec<f64> = (2..=k).map(|j| tc.kappa(j).expect("order in range")).collect();
    let mut v = json!({
        "M": m,
        "sigma_M": tc.sigma_m(),
        "kappa_orders": (2..=k).collect::<Vec<_>>(),
        "kappa": kappa,
        "be_bound": berry_esseen_bound(spec, m)?,
        "be_ratio": be_condition_ratio(spec, m)?,
    });
    if let Some(b) = normalized_lower_bound(spec, m)? {
        v["lower_support"] = json!(b);
    }
    Ok(v)
}

pub fn cumulants_cmd(a: CumulantsArgs, argv: Vec<String>) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    let config = json!({"spec": spec_json(&spec), "M": a.m, "K": a.k});
    let mut s = Session::new("cumulants", argv, config);
    if a.k < 2 {
        bail!(gamma_tail::Error::Domain("K must be at least 2".into()));
    }
    let value = cumulant_summary(&spec, a.m, a.k)?;
    s.emit_json(a.out.as_deref(), &value)?;
    s.finish()
}

pub fn edgeworth(a: EdgeworthArgs, argv: Vec<String>) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    let grid = parse_grid(&a.grid)?;
    let config = json!({"spec": spec_json(&spec), "M": a.m, "N": a.n, "grid": a.grid});
    let mut s = Session::new("edgeworth", argv, config);
    let tc = gamma_tail::cumulants(&spec, a.m, a.n.max(2))?;
    let e = build_expansion(&tc, a.n)?;
    let points: Vec<_> = grid.iter().map(|&x| e.evaluate(x)).collect();
    let bad = points.iter().filter(|p| p.out_of_range).count();
    if bad > 0 {
        s.warn(format!("{bad} grid points have cdf outside [0, 1] or negative density (values are unclamped)"));
    }
    let cdf: Vec<f64> = points.iter().map(|p| p.cdf).collect();
    let pdf: Vec<f64> = points.iter().map(|p| p.pdf).collect();
    s.emit(a.out.as_deref(), |w| Ok(write_columns_csv(&["x", "cdf", "pdf"], &[&grid, &cdf, &pdf], w)?))?;
    s.finish()
}

pub fn head(a: HeadArgs, argv: Vec<String>) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    let cf = HeadCf::new(&spec, a.m)?;
    let grid = match &a.grid {
        Some(g) => parse_grid(g)?,
        None => cf.default_grid()?,
    };
    let config = json!({"spec": spec_json(&spec), "M": a.m, "grid": a.grid, "grid_points": grid.len()});
    let mut s = Session::new("head", argv, config);
    if !cf.has_bounded_density() {
        s.warn("head density is unbounded at the support start; pdf column omitted");
    }
    let table = invert_to_table(&cf, &grid)?;
    s.emit_table(a.out.as_deref(), &table)?;
    s.finish()
}

pub fn zdist(a: ZdistArgs, argv: Vec<String>) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    let mut cfg = PipelineConfig::new(spec.clone(), a.m, a.n)?.with_quad_points(a.quad_points);
    if let Some(g) = &a.grid {
        cfg = cfg.with_grid(parse_grid(g)?);
    }
    let config = json!({
        "spec": spec_json(&spec), "M": a.m, "N": a.n, "grid": a.grid, "grid_points": cfg.grid.len(),
        "quad_points": a.quad_points, "robustness": a.robustness, "mc_samples": a.mc_samples, "seed": a.seed,
    });
    let mut s = Session::new("zdist", argv, config);
    let table = z_cdf(&cfg)?;
    let robustness = match &a.robustness {
        Some(ms) => Some(m_robustness(&cfg, ms)?),
        None => None,
    };
    let ks = if a.mc_samples > 0 {
        let batch = sample(&spec, Target::Full, SampleMode::NormalTail, a.mc_samples, a.seed, None)?;
        Some(ks_distance(&batch.values, |x| table.cdf_at(x))?)
    } else {
        None
    };
    if !table.covers_bulk() {
        s.warn("grid does not cover the bulk of the distribution (cdf range narrower than [0.001, 0.999])");
    }
    s.emit_table(Some(&a.out), &table)?;
    let summary = json!({
        "ks_vs_mc": ks,
        "ks_band_99": (a.mc_samples > 0).then(|| ks_band(a.mc_samples)),
        "robustness": robustness.map(|d| json!({"levels": a.robustness, "sup_distance": d})),
        "warnings": s.warnings,
    });
    s.emit_json(None, &summary)?;
    if let Some(path) = &a.summary {
        s.emit_json(Some(path), &summary)?;
    }
    s.finish()
}

fn parse_target(t: &str) -> Result<Target> {
    let level = |v: &str| -> Result<usize> { v.parse().with_context(|| format!("bad level in target {t:?}")) };
    match t.split_once(':') {
        None if t == "z" => Ok(Target::Full),
        Some(("head", m)) => Ok(Target::Head(level(m)?)),
        Some(("tail", m)) => Ok(Target::NormalizedTail(level(m)?)),
        _ => bail!(gamma_tail::Error::Domain(format!("target must be z, head:M or tail:M, got {t:?}"))),
    }
}

pub fn mc(a: McArgs, argv: Vec<String>) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    let mode: SampleMode = a.mode.parse()?;
    let target = parse_target(&a.target)?;
    let batch = sample(&spec, target, mode, a.n, a.seed, a.n_terms)?;
    let config = json!({
        "spec": spec_json(&spec), "mode": a.mode, "n": a.n, "seed": a.seed, "target": a.target,
        "n_terms": batch.n_terms, "neglected_sigma": batch.neglected_sigma, "rng": batch.rng_algorithm,
    });
    let mut s = Session::new("mc", argv, config.clone());
    save_samples(&batch.values, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    s.outputs.push(a.out.clone());
    s.emit_json(None, &config)?;
    s.finish()
}

pub fn validate(a: ValidateArgs, argv: Vec<String>) -> Result<()> {
    let table = load_table_csv(&a.table).with_context(|| format!("loading {}", a.table.display()))?;
    let samples = load_samples(&a.samples).with_context(|| format!("loading {}", a.samples.display()))?;
    let config = json!({"table": a.table, "samples": a.samples});
    let mut s = Session::new("validate", argv, config);
    let ks = ks_distance(&samples, |x| table.cdf_at(x))?;
    let (lo, hi) = (table.grid()[0], table.grid()[table.len() - 1]);
    let outside = samples.iter().filter(|v| **v < lo || **v > hi).count();
    if outside > 0 {
        s.warn(format!("{outside} samples fall outside the table grid [{lo}, {hi}]"));
    }
    let value = json!({"ks": ks, "n": samples.len(), "ks_band_99": ks_band(samples.len()), "warnings": s.warnings});
    s.emit_json(a.out.as_deref(), &value)?;
    s.finish()
}

const REPRO_R: f64 = 0.5;
const REPRO_GAMMA: f64 = 0.75;
const REPRO_ORDER: usize = 5;
const REPRO_LEVELS: [usize; 4] = [2, 5, 10, 20];
const REPRO_C: f64 = 0.4375;
const REPRO_C_TOL: f64 = 5e-5;

pub fn repro(a: ReproArgs, argv: Vec<String>) -> Result<()> {
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let dir = |name: String| a.out_dir.join(name);
    let spec = make_power_law_normalized(REPRO_GAMMA, REPRO_R)?;
    let spec_file = SpecFile { r: REPRO_R, weights: WeightsFile::PowerLaw { gamma: REPRO_GAMMA, scale: None } };
    let config = json!({
        "spec": spec_file, "N": REPRO_ORDER, "levels": REPRO_LEVELS,
        "mc_samples": a.mc_samples, "seed": a.seed, "out_dir": a.out_dir,
    });
    let mut s = Session::new("repro-sec6", argv, config);
    s.emit_json(Some(&dir("spec.json".into())), &serde_json::to_value(&spec_file)?)?;

    let c = spec.weight(1);
    let mut be = Vec::new();
    for m in REPRO_LEVELS {
        let summary = cumulant_summary(&spec, m, REPRO_ORDER)?;
        be.push(json!({"M": m, "kappa_3": summary["kappa"][1], "be_bound": summary["be_bound"]}));
        s.emit_json(Some(&dir(format!("cumulants_M{m}.json"))), &summary)?;
        let cf = HeadCf::new(&spec, m)?;
        let head = invert_to_table(&cf, &cf.default_grid()?)?;
        s.emit_table(Some(&dir(format!("head_M{m}.csv"))), &head)?;
    }

    let base = PipelineConfig::new(spec.clone(), REPRO_LEVELS[0], REPRO_ORDER)?;
    let mut tables = Vec::new();
    for m in REPRO_LEVELS {
        let table = z_cdf(&base.clone().with_m(m))?;
        s.emit_table(Some(&dir(format!("z_M{m}.csv"))), &table)?;
        tables.push(table);
    }
    let mut robustness: f64 = 0.0;
    for i in 0..tables.len() {
        for j in i + 1..tables.len() {
            robustness = robustness.max(tables[i].sup_distance(&tables[j])?);
        }
    }

    let ks = if a.mc_samples > 0 {
        let batch = sample(&spec, Target::Full, SampleMode::NormalTail, a.mc_samples, a.seed, None)?;
        let ks = ks_distance(&batch.values, |x| tables[2].cdf_at(x))?;
        Some(json!({"M": 10, "n": a.mc_samples, "ks": ks, "ks_band_99": ks_band(a.mc_samples), "mc_terms": batch.n_terms}))
    } else {
        None
    };

    let c_ok = (c - REPRO_C).abs() <= REPRO_C_TOL;
    let summary = json!({
        "normalization_constant": {"C": c, "expected": REPRO_C, "tolerance": REPRO_C_TOL, "pass": c_ok},
        "robustness": {"levels": REPRO_LEVELS, "N": REPRO_ORDER, "sup_distance": robustness, "threshold": 0.005},
        "berry_esseen": be,
        "ks_vs_mc": ks,
        "warnings": s.warnings,
    });
    s.emit_json(Some(&dir("summary.json".into())), &summary)?;
    s.emit_json(None, &summary)?;
    s.finish()?;
    if !c_ok {
        bail!(InvariantViolation(format!("C = {c} differs from {REPRO_C} by more than {REPRO_C_TOL}")));
    }
    Ok(())
}
