use double_layer::bound::{build_chi_problem, find_roots, ladder_of};
use double_layer::squeeze::{
    analyze_resonance, delta_prime_pairing, loglog_slope, squeezed_interaction_of, sweep_ladder, ResonanceAnalysis,
    Scenario, SqueezeFamily, SweepConfig,
};
use double_layer::xfer::{reflection_transmission, scattering_data, scattering_wavefunction_with_tol, EIGEN_TOL};
use double_layer::{DoubleLayerSpec, Wavenumber};
use serde::Serialize;

use crate::config::{RunConfig, Source, WaveMode};
use crate::output::{gnuplot, Cell, Format, Outputs, Table};
use crate::CliError;

/// Default resonance tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

pub struct Context {
    pub format: Format,
    pub tol: Option<f64>,
}

impl Context {
    fn tol(&self, cfg: &RunConfig) -> f64 {
        self.tol.or(cfg.tolerance).unwrap_or(DEFAULT_TOL)
    }
}

/// Specs to evaluate: the spec itself, or the family realized on its ε-grid.
fn realized(cfg: &RunConfig) -> Result<Vec<(Option<f64>, DoubleLayerSpec)>, CliError> {
    match cfg.source()? {
        Source::Spec(s) => {
            if cfg.eps.is_some() {
                return Err(CliError::Config("`eps` applies to a family only".into()));
            }
            Ok(vec![(None, s)])
        }
        Source::Family(f) => {
            let eps = cfg.grid(&cfg.eps, "eps")?;
            eps.iter().map(|&e| Ok((Some(e), f.realize(e)?))).collect()
        }
    }
}

pub fn scatter(cfg: &RunConfig, ctx: &Context) -> Result<Outputs, CliError> {
    let ks = cfg.grid(&cfg.k, "k")?;
    if ks.iter().any(|&k| k <= 0.0) {
        return Err(CliError::Config("k: values must be positive".into()));
    }
    let mut table =
        Table::new(&["eps", "k", "re_a", "im_a", "re_b", "im_b", "t2", "r2", "unitarity_defect"]);
    for (eps, spec) in realized(cfg)? {
        for &k in &ks {
            let sd = scattering_data(&spec, Wavenumber::real(k)?);
            let (t2, r2) = match reflection_transmission(&sd) {
                Ok(rt) => (rt.t_left.norm_sqr(), rt.r_left.norm_sqr()),
                Err(_) => (f64::NAN, f64::NAN),
            };
            table.push(vec![
                eps.into(),
                k.into(),
                sd.a.re.into(),
                sd.a.im.into(),
                sd.b.re.into(),
                sd.b.im.into(),
                t2.into(),
                r2.into(),
                sd.unitarity_defect().into(),
            ]);
        }
    }
    let mut out = Outputs::default();
    out.table("scatter", &table, ctx.format)?;
    out.text("scatter.gp", gnuplot("scatter.csv", "transmission and reflection", 2, &[(7, "|T|^2"), (8, "|R|^2")], false));
    Ok(out)
}

#[derive(Serialize)]
struct BoundSummary {
    spec_version: u32,
    scenario: String,
    family: SqueezeFamily,
    branch: String,
    classification: Scenario,
    survivor: Option<String>,
    kappa_limit: Option<f64>,
    final_gap: Option<f64>,
    decade_ratio: Option<f64>,
    resonance: ResonanceAnalysis,
    failures: Vec<(f64, String)>,
    branch_overrides: Vec<f64>,
}

pub fn boundstates(cfg: &RunConfig, ctx: &Context) -> Result<Outputs, CliError> {
    let family = cfg.family()?;
    let eps = cfg.grid(&cfg.eps, "eps")?;
    let tol = ctx.tol(cfg);
    let sweep_cfg = SweepConfig { probe_k: cfg.probe_k, resonance_tol: tol, ..SweepConfig::default() };
    let sweep = sweep_ladder(&family, &eps, &sweep_cfg)?;
    let mut table = Table::new(&["eps", "level_index", "kappa", "survivor"]);
    let survivor_index = |n: usize| match sweep.diagnostics.survivor {
        Some(double_layer::squeeze::Survivor::Lowest) => Some(0),
        Some(double_layer::squeeze::Survivor::Highest) => n.checked_sub(1),
        None => None,
    };
    for p in &sweep.points {
        let Some(ladder) = &p.ladder else { continue };
        let s = survivor_index(ladder.len());
        for (i, &kappa) in ladder.levels.iter().enumerate() {
            let flag = if Some(i) == s { 1usize } else { 0 };
            table.push(vec![p.eps.into(), (i + 1).into(), kappa.into(), flag.into()]);
        }
    }
    let d = &sweep.diagnostics;
    let summary = BoundSummary {
        spec_version: 1,
        scenario: cfg.scenario.clone(),
        family,
        branch: format!("{:?}", sweep.branch),
        classification: d.scenario,
        survivor: d.survivor.map(|s| format!("{s:?}")),
        kappa_limit: d.kappa_limit,
        final_gap: d.final_gap,
        decade_ratio: d.decade_ratio,
        resonance: analyze_resonance(&family, tol)?,
        failures: sweep.points.iter().filter_map(|p| p.failure.clone().map(|f| (p.eps, f))).collect(),
        branch_overrides: sweep.points.iter().filter(|p| p.branch_override).map(|p| p.eps).collect(),
    };
    let mut out = Outputs::default();
    out.table("boundstates", &table, ctx.format)?;
    out.json("boundstates_summary.json", &summary)?;
    out.text(
        "boundstates.gp",
        "set datafile separator ','\nset logscale xy\nset xlabel 'eps'\nset ylabel 'kappa (1/nm)'\n\
         plot 'boundstates.csv' using 1:3 every ::1 with points pt 7 ps 0.5 title 'kappa_i'\n"
            .to_string(),
    );
    Ok(out)
}

#[derive(Serialize)]
struct Sample {
    k: f64,
    re_a: f64,
    im_a: f64,
    re_b: f64,
    im_b: f64,
}

#[derive(Serialize)]
struct ResonanceReport {
    spec_version: u32,
    scenario: String,
    family: SqueezeFamily,
    #[serde(flatten)]
    analysis: ResonanceAnalysis,
    samples: Vec<Sample>,
}

pub fn resonance(cfg: &RunConfig, ctx: &Context) -> Result<Outputs, CliError> {
    let family = cfg.family()?;
    let tol = ctx.tol(cfg);
    let analysis = analyze_resonance(&family, tol)?;
    let si = squeezed_interaction_of(&family, tol)?;
    let ks = match &cfg.k {
        Some(g) => g.values("k")?,
        None => Vec::new(),
    };
    let mut samples = Vec::new();
    for &k in &ks {
        if let Ok(sd) = si.scattering(Wavenumber::real(k)?) {
            samples.push(Sample { k, re_a: sd.a.re, im_a: sd.a.im, re_b: sd.b.re, im_b: sd.b.im });
        }
    }
    let mut out = Outputs::default();
    let report = ResonanceReport { spec_version: 1, scenario: cfg.scenario.clone(), family, analysis, samples };
    out.json("resonance.json", &report)?;
    if ctx.format == Format::Csv && !report.samples.is_empty() {
        let mut t = Table::new(&["k", "re_a", "im_a", "re_b", "im_b"]);
        for s in &report.samples {
            t.push(vec![s.k.into(), s.re_a.into(), s.im_a.into(), s.re_b.into(), s.im_b.into()]);
        }
        out.table("resonance_samples", &t, Format::Csv)?;
    }
    Ok(out)
}

pub fn wavefunction(cfg: &RunConfig, ctx: &Context) -> Result<Outputs, CliError> {
    let xs = cfg.grid(&cfg.x, "x")?;
    let mode = cfg.mode.ok_or_else(|| CliError::Config("missing `mode`".into()))?;
    let mut table = Table::new(&["eps", "x", "re_phi", "im_phi", "abs_phi"]);
    for (eps, spec) in realized(cfg)? {
        let k = match mode {
            WaveMode::Scatter { k } => Wavenumber::real(k)?,
            WaveMode::Bound { level } => {
                let ladder = match eps {
                    Some(_) => find_roots(&build_chi_problem(&spec)?),
                    None => ladder_of(&spec)?,
                };
                let kappa = *ladder.levels.get(level).ok_or_else(|| {
                    CliError::Domain(format!(
                        "bound level {level} absent: ladder has {} levels {:?}",
                        ladder.len(),
                        ladder.levels
                    ))
                })?;
                Wavenumber::imaginary(kappa)?
            }
        };
        let tol = ctx.tol.or(cfg.tolerance).map_or(EIGEN_TOL, |t| t.max(EIGEN_TOL));
        let w = scattering_wavefunction_with_tol(&spec, k, tol)?;
        for &x in &xs {
            let v = w.eval(x);
            table.push(vec![eps.into(), x.into(), v.re.into(), v.im.into(), v.norm().into()]);
        }
    }
    let mut out = Outputs::default();
    out.table("wavefunction", &table, ctx.format)?;
    out.text("wavefunction.gp", gnuplot("wavefunction.csv", "wavefunction", 2, &[(3, "Re phi"), (5, "|phi|")], false));
    Ok(out)
}

pub fn deltaprime(cfg: &RunConfig, ctx: &Context) -> Result<Outputs, CliError> {
    let family = cfg.family()?;
    let eps = cfg.grid(&cfg.eps, "eps")?;
    let tf = cfg.test_function.clone().ok_or_else(|| CliError::Config("missing `test_function`".into()))?;
    tf.validate().map_err(|e| CliError::Config(format!("test_function: {e}")))?;
    let pairings = eps.iter().map(|&e| delta_prime_pairing(&family, e, &tf)).collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["eps", "pairing", "limit", "gap", "slope", "divergence_order"]);
    for (i, p) in pairings.iter().enumerate() {
        // Local log–log slope of the gap (or of |pairing| when there is no limit).
        let measure = |q: &double_layer::squeeze::Pairing| q.gap.unwrap_or(q.value.abs());
        let slope = if i == 0 {
            None
        } else {
            let prev = &pairings[i - 1];
            loglog_slope(&[prev.eps, p.eps], &[measure(prev), measure(p)])
        };
        table.push(vec![
            p.eps.into(),
            p.value.into(),
            p.limit.into(),
            p.gap.into(),
            slope.map_or(Cell::Empty, Cell::F),
            p.divergence_order.into(),
        ]);
    }
    let mut out = Outputs::default();
    out.table("deltaprime", &table, ctx.format)?;
    out.text(
        "deltaprime.gp",
        "set datafile separator ','\nset logscale xy\nset xlabel 'eps'\n\
         plot 'deltaprime.csv' using 1:4 with linespoints title 'gap'\n"
            .to_string(),
    );
    Ok(out)
}
