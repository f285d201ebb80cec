//! Run configuration, suite orchestration and the line-delimited report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{make_grids, sample, write_fixture, Extents, SampledFunction, TestFunctionSpec};
use crate::error::{HywError, Result};
use crate::grid::Grid1D;
use crate::group::{GroupElement, ModelKind, Transversal};
use crate::schatten::WeightedKernel;
use crate::transform::{detect_band, fourier_transform_p, FourierField, TransformOptions};
use crate::verify::{
    check_dual_measure_scaling, check_gaussian_extremality, check_hausdorff_young, check_minkowski,
    check_nilpotent_bound, check_plancherel, check_proof_chain, check_russo, check_semi_invariance,
    plancherel_refinement, ChainTolerances, CheckResult, ConstantRegime,
};

pub const REPORT_MAGIC: &str = "HYWREPORT 1";

/// Refined errors below this are roundoff; see [`CheckFamily::PlancherelRefinement`].
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

/// Families of checks a run can select.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckFamily {
    Plancherel,
    PlancherelRefinement,
    HausdorffYoung,
    ProofChain,
    NilpotentBound,
    SemiInvariance,
    DualMeasureScaling,
    Russo,
    Minkowski,
    GaussianExtremality,
}

impl CheckFamily {
    pub const ALL: [CheckFamily; 10] = [
        Self::Plancherel,
        Self::PlancherelRefinement,
        Self::HausdorffYoung,
        Self::ProofChain,
        Self::NilpotentBound,
        Self::SemiInvariance,
        Self::DualMeasureScaling,
        Self::Russo,
        Self::Minkowski,
        Self::GaussianExtremality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Plancherel => "plancherel",
            Self::PlancherelRefinement => "plancherel-refinement",
            Self::HausdorffYoung => "hausdorff-young",
            Self::ProofChain => "proof-chain",
            Self::NilpotentBound => "nilpotent-bound",
            Self::SemiInvariance => "semi-invariance",
            Self::DualMeasureScaling => "dual-measure-scaling",
            Self::Russo => "russo",
            Self::Minkowski => "minkowski",
            Self::GaussianExtremality => "gaussian-extremality",
        }
    }

    /// Whether the family applies to `group`.
    pub fn applies_to(self, group: ModelKind) -> bool {
        self != Self::NilpotentBound || group == ModelKind::Heisenberg
    }
}

impl std::str::FromStr for CheckFamily {
    type Err = HywError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.iter().copied().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|f| f.name()).collect();
            HywError::Config(format!("unknown check '{s}'; valid checks: {}", names.join(", ")))
        })
    }
}

/// Parses `all`, an empty string or a comma-separated list of family names.
pub fn parse_checks(s: &str) -> Result<Vec<CheckFamily>> {
    let s = s.trim();
    if s == "all" {
        return Ok(CheckFamily::ALL.to_vec());
    }
    let mut out: Vec<CheckFamily> = s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// Tolerances of every check family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub plancherel: f64,
    pub hausdorff_young: f64,
    pub nilpotent: f64,
    pub chain: ChainTolerances,
    pub semi_invariance: f64,
    pub dual_scaling: f64,
    pub russo: f64,
    pub minkowski: f64,
    /// Relative distance below `A_p` allowed for Gaussian slice ratios.
    pub extremality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            plancherel: 1e-2,
            hausdorff_young: 1e-6,
            nilpotent: 1e-6,
            chain: ChainTolerances::default(),
            semi_invariance: 1e-10,
            dual_scaling: 1e-12,
            russo: 1e-10,
            minkowski: 1e-10,
            extremality: 1e-2,
        }
    }
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub group: ModelKind,
    pub p: Vec<f64>,
    /// Points per `N` axis.
    pub grid_n: usize,
    /// Points on the `H` axis.
    pub grid_h: usize,
    pub extents: Option<Extents>,
    pub seed: u64,
    /// Test functions: the default Gaussian plus `fixtures − 1` random packets.
    pub fixtures: usize,
    pub checks: Vec<CheckFamily>,
    pub constants: ConstantRegime,
    pub tolerances: Tolerances,
    pub transform: TransformOptions,
    /// Random instances for each synthetic check family.
    pub synthetic_cases: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::for_group(ModelKind::Axb)
    }
}

impl RunConfig {
    pub fn for_group(group: ModelKind) -> Self {
        Self {
            group,
            p: vec![1.5],
            grid_n: if group == ModelKind::Axb { 128 } else { 64 },
            grid_h: 128,
            extents: None,
            seed: 42,
            fixtures: 4,
            checks: CheckFamily::ALL.to_vec(),
            constants: ConstantRegime::Sharp,
            tolerances: Tolerances::default(),
            transform: TransformOptions::default(),
            synthetic_cases: 100,
        }
    }

    pub fn extents(&self) -> Extents {
        self.extents.clone().unwrap_or_else(|| Extents::default_for(self.group))
    }

    /// Rejects configurations before any computation.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HywError::Config(m));
        if self.p.is_empty() {
            return bad("at least one exponent p is required".into());
        }
        for p in &self.p {
            if !(*p > 1.0 && *p <= 2.0) {
                return bad(format!("exponent p = {p} is outside (1, 2]"));
            }
        }
        for (name, n) in [("grid_n", self.grid_n), ("grid_h", self.grid_h)] {
            if n < 8 || !n.is_power_of_two() {
                return bad(format!("{name} = {n} must be a power of two >= 8"));
            }
        }
        if self.fixtures == 0 {
            return bad("fixtures must be at least 1".into());
        }
        let ext = self.extents();
        if ext.n.len() != self.group.model().dim_n() {
            return bad(format!("extents give {} N axes, {} has {}", ext.n.len(), self.group, self.group.model().dim_n()));
        }
        if ext.n.iter().chain(std::iter::once(&ext.h)).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return bad("every extent must be a finite interval lo < hi".into());
        }
        make_grids(self.group.model(), self.grid_n, self.grid_h, &ext).map_err(|e| HywError::Config(e.to_string()))?;
        let t = &self.tolerances;
        let all = [
            t.plancherel,
            t.hausdorff_young,
            t.nilpotent,
            t.chain.exact,
            t.chain.disintegration,
            t.chain.slice,
            t.chain.l2_equality,
            t.semi_invariance,
            t.dual_scaling,
            t.russo,
            t.minkowski,
            t.extremality,
        ];
        if all.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return bad("tolerances must be finite and nonnegative".into());
        }
        let tp = &self.transform.transversal;
        if tp.lambda_points < 2 || tp.lambda_points % 2 != 0 {
            return bad("lambda_points must be an even number >= 2".into());
        }
        Ok(())
    }

    /// Seeds of the random fixtures (index 0 is the Gaussian).
    pub fn fixture_specs(&self) -> Vec<(String, u64, TestFunctionSpec)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = vec![("fixture-00-gaussian".to_string(), self.seed, TestFunctionSpec::default_gaussian(self.group))];
        for i in 1..self.fixtures {
            let s: u64 = rng.gen();
            out.push((format!("fixture-{i:02}-packets"), s, TestFunctionSpec::random(self.group, s)));
        }
        out
    }
}

/// Records plus header data of one run.
#[derive(Debug, Clone)]
pub struct Report {
    pub config: RunConfig,
    pub model: String,
    pub records: Vec<CheckResult>,
    /// Wall time per family.
    pub runtimes: BTreeMap<String, Duration>,
    /// Fixtures whose proof chain failed, serialized for inspection.
    pub dumps: Vec<(String, Vec<u8>)>,
    /// Non-fatal findings (aliasing, truncated mass).
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub records: usize,
    pub failed: usize,
    /// Smallest `(rhs − lhs)/|rhs|` for inequalities, largest margin otherwise.
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub families: BTreeMap<String, FamilySummary>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn summary(&self) -> Summary {
        let mut families: BTreeMap<String, FamilySummary> = BTreeMap::new();
        for r in &self.records {
            let fam = r.check.split('/').next().unwrap_or(&r.check).to_string();
            let score = match r.kind {
                crate::verify::CheckKind::Inequality => {
                    if r.rhs != 0.0 {
                        (r.rhs - r.lhs) / r.rhs.abs()
                    } else {
                        r.rhs - r.lhs
                    }
                }
                _ => r.margin,
            };
            let e = families.entry(fam).or_insert(FamilySummary { records: 0, failed: 0, worst: f64::NAN });
            e.records += 1;
            e.failed += usize::from(!r.pass);
            let worse = match r.kind {
                crate::verify::CheckKind::Inequality => e.worst.is_nan() || score < e.worst,
                _ => e.worst.is_nan() || score > e.worst,
            };
            if worse {
                e.worst = score;
            }
        }
        let failed = self.records.iter().filter(|r| !r.pass).count();
        Summary { total: self.records.len(), passed: self.records.len() - failed, failed, families }
    }

    /// Record lines; identical for identical configurations.
    pub fn body(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&serde_json::to_string(r).expect("records serialize"));
            s.push('\n');
        }
        s
    }

    /// The full report: magic line, header, records, summary footer.
    pub fn render(&self, started_unix: u64) -> String {
        let runtimes: BTreeMap<&str, f64> = self.runtimes.iter().map(|(k, v)| (k.as_str(), v.as_secs_f64())).collect();
        let header = serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.config,
            "model": self.model,
            "started_unix": started_unix,
            "threads": rayon::current_num_threads(),
            "runtime_s": runtimes,
            "warnings": self.warnings,
        });
        let mut out = String::new();
        let _ = writeln!(out, "{REPORT_MAGIC}");
        let _ = writeln!(out, "# header {header}");
        out.push_str(&self.body());
        let sum = self.summary();
        let _ = writeln!(out, "# summary {}", serde_json::to_string(&sum).expect("summary serializes"));
        let _ = writeln!(out, "# {} records, {} passed, {} failed", sum.total, sum.passed, sum.failed);
        out
    }
}

fn sort_records(records: &mut [CheckResult]) {
    records.sort_by(|a, b| {
        a.check
            .cmp(&b.check)
            .then_with(|| a.group.cmp(&b.group))
            .then_with(|| a.p.unwrap_or(0.0).total_cmp(&b.p.unwrap_or(0.0)))
            .then_with(|| a.case.cmp(&b.case))
            .then_with(|| a.grid.cmp(&b.grid))
    });
}

struct FixtureOutcome {
    records: Vec<(CheckFamily, CheckResult)>,
    dumps: Vec<(String, Vec<u8>)>,
    warnings: Vec<String>,
}

fn fixture_jobs(
    config: &RunConfig,
    name: &str,
    seed: u64,
    spec: &TestFunctionSpec,
    grids: &(Vec<Grid1D>, Grid1D),
) -> Result<FixtureOutcome> {
    let fam = |f: CheckFamily| config.checks.contains(&f) && f.applies_to(config.group);
    let g = sample(spec, grids, config.group)?;
    let opts = &config.transform;
    let tol = &config.tolerances;
    let mut out = FixtureOutcome { records: Vec::new(), dumps: Vec::new(), warnings: Vec::new() };
    let case = |r: CheckResult| r.with_case(name);

    if fam(CheckFamily::Plancherel) || fam(CheckFamily::PlancherelRefinement) || fam(CheckFamily::HausdorffYoung) {
        let band = detect_band(&g, opts)?;
        if band.near_alias {
            out.warnings.push(format!("{name}: N band reaches the Nyquist frequency"));
        }
        if band.truncated_l1 > 1e-8 {
            out.warnings.push(format!("{name}: {:.2e} of the L1 mass lies in dropped H slices", band.truncated_l1));
        }
    }
    if fam(CheckFamily::Plancherel) {
        out.records.push((CheckFamily::Plancherel, case(check_plancherel(&g, opts, tol.plancherel)?)));
    }
    if fam(CheckFamily::PlancherelRefinement) && name.ends_with("gaussian") {
        let start = Instant::now();
        let f = spec.evaluator();
        let (coarse, fine) = plancherel_refinement(&g, |n, t| f(n, t), opts)?;
        // non-increase of the relative error, with a roundoff floor
        let r = CheckResult::inequality("plancherel-refinement", fine, coarse.max(ROUNDOFF_FLOOR), 0.0)
            .with_group(config.group.name())
            .with_grid(crate::verify::grid_descriptor(&g))
            .with_p(2.0)
            .with_runtime(start.elapsed());
        out.records.push((CheckFamily::PlancherelRefinement, case(r)));
    }
    let needs_field = fam(CheckFamily::HausdorffYoung) || fam(CheckFamily::ProofChain) || fam(CheckFamily::NilpotentBound);
    if needs_field {
        let mut shared: Option<FourierField> = None;
        for p in &config.p {
            let field = match shared.as_ref().and_then(|f| f.with_exponent(*p)) {
                Some(f) => f,
                None => fourier_transform_p(&g, *p, opts)?,
            };
            if fam(CheckFamily::HausdorffYoung) {
                out.records.push((
                    CheckFamily::HausdorffYoung,
                    case(check_hausdorff_young(&g, &field, config.constants, tol.hausdorff_young)?),
                ));
            }
            if fam(CheckFamily::NilpotentBound) {
                out.records.push((CheckFamily::NilpotentBound, case(check_nilpotent_bound(&g, &field, tol.nilpotent)?)));
            }
            if fam(CheckFamily::ProofChain) {
                let (_, recs) = check_proof_chain(&g, &field, config.constants, opts, &tol.chain)?;
                if recs.iter().any(|r| !r.pass) {
                    let mut bytes = Vec::new();
                    write_fixture(&mut bytes, &g, seed)?;
                    out.dumps.push((format!("{name}-p{p}"), bytes));
                }
                out.records.extend(recs.into_iter().map(|r| (CheckFamily::ProofChain, case(r))));
            }
            shared = Some(field);
        }
    }
    if fam(CheckFamily::GaussianExtremality) && name.ends_with("gaussian") {
        for p in &config.p {
            let r = check_gaussian_extremality(&g, *p, opts.pad_factor, tol.extremality)?;
            out.records.push((CheckFamily::GaussianExtremality, case(r)));
        }
    }
    Ok(out)
}

/// Random grid-compatible elements and semi-invariance records.
fn semi_invariance_jobs(config: &RunConfig, grids: &(Vec<Grid1D>, Grid1D)) -> Result<Vec<CheckResult>> {
    let model = config.group.model();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5e31);
    let h = &grids.1;
    let dt = h.spacing().expect("uniform H grid");
    let base = match model.transversal() {
        Transversal::Atoms(a) => a[0].base.clone(),
        Transversal::Line { direction, .. } => direction.iter().map(|d| 1.3 * d).collect(),
    };
    let n_cases = config.synthetic_cases.clamp(1, 20);
    (0..n_cases)
        .map(|i| {
            let shift = rng.gen_range(-(h.len() as i64) / 4..=(h.len() as i64) / 4);
            let n: Vec<f64> = (0..model.dim_n()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let x = GroupElement::new(n, model.h_from_coord(shift as f64 * dt));
            Ok(check_semi_invariance(model, &base, &x, h, config.tolerances.semi_invariance)?.with_case(format!("x{i:03}")))
        })
        .collect()
}

fn dual_scaling_jobs(config: &RunConfig) -> Result<Vec<CheckResult>> {
    let model = config.group.model();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xd5a1);
    (0..config.synthetic_cases)
        .map(|i| {
            let h = model.h_from_coord(rng.gen_range(-3.0..3.0));
            let lo: Vec<f64> = (0..model.dim_n()).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let hi: Vec<f64> = lo.iter().map(|a| a + rng.gen_range(0.01..4.0)).collect();
            Ok(check_dual_measure_scaling(model, h, &lo, &hi, config.tolerances.dual_scaling)?.with_case(format!("box{i:04}")))
        })
        .collect()
}

/// Random kernel with positive weights, used by the synthetic families.
pub fn random_kernel(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Result<WeightedKernel> {
    let rw: Vec<f64> = (0..rows).map(|_| rng.gen_range(0.05..1.0)).collect();
    let cw: Vec<f64> = (0..cols).map(|_| rng.gen_range(0.05..1.0)).collect();
    let xi = Grid1D::new((0..rows).map(|i| i as f64).collect(), rw)?;
    let gamma = Grid1D::new((0..cols).map(|j| j as f64).collect(), cw)?;
    let heavy = rng.gen_bool(0.5);
    let values = DMatrix::from_fn(rows, cols, |_, _| {
        let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        // heavy-tailed magnitudes stress the mixed norms
        let s = if heavy { (rng.gen_range(-3.0..3.0f64)).exp() } else { 1.0 };
        Complex64::new(a * s, b * s)
    });
    WeightedKernel::new(xi, gamma, values)
}

fn synthetic_jobs(config: &RunConfig, family: CheckFamily) -> Result<Vec<CheckResult>> {
    let salt = if family == CheckFamily::Russo { 0x7255 } else { 0x3145 };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ salt);
    let mut out = Vec::with_capacity(config.synthetic_cases);
    for i in 0..config.synthetic_cases {
        let p = config.p[i % config.p.len()];
        let (rows, cols) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let k = random_kernel(&mut rng, rows, cols)?;
        let r = match family {
            CheckFamily::Russo => check_russo(&k, p, config.tolerances.russo)?,
            _ => {
                let mags = k.values().map(|z| z.norm());
                let q = crate::schatten::conjugate_exponent(p);
                check_minkowski(&mags, k.xi_grid().weights(), k.gamma_grid().weights(), p, q, config.tolerances.minkowski)?
            }
        };
        out.push(r.with_group("synthetic").with_case(format!("kernel{i:04}-{rows}x{cols}")));
    }
    Ok(out)
}

/// Runs the selected checks. Invalid configurations fail before any work.
pub fn run_suite(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let model = config.group.model();
    let grids = make_grids(model, config.grid_n, config.grid_h, &config.extents())?;
    let mut report = Report {
        config: config.clone(),
        model: model.describe(),
        records: Vec::new(),
        runtimes: BTreeMap::new(),
        dumps: Vec::new(),
        warnings: Vec::new(),
    };
    let selected = |f: CheckFamily| config.checks.contains(&f) && f.applies_to(config.group);
    let per_fixture = [
        CheckFamily::Plancherel,
        CheckFamily::PlancherelRefinement,
        CheckFamily::HausdorffYoung,
        CheckFamily::ProofChain,
        CheckFamily::NilpotentBound,
        CheckFamily::GaussianExtremality,
    ];
    if per_fixture.iter().any(|f| selected(*f)) {
        let specs = config.fixture_specs();
        let outcomes: Vec<FixtureOutcome> = specs
            .par_iter()
            .map(|(name, seed, spec)| fixture_jobs(config, name, *seed, spec, &grids))
            .collect::<Result<_>>()?;
        for o in outcomes {
            for (fam, r) in o.records {
                *report.runtimes.entry(fam.name().to_string()).or_default() += r.runtime;
                report.records.push(r);
            }
            report.dumps.extend(o.dumps);
            report.warnings.extend(o.warnings);
        }
    }
    type Job<'a> = (CheckFamily, Box<dyn Fn() -> Result<Vec<CheckResult>> + Send + Sync + 'a>);
    let jobs: Vec<Job> = vec![
        (CheckFamily::SemiInvariance, Box::new(|| semi_invariance_jobs(config, &grids))),
        (CheckFamily::DualMeasureScaling, Box::new(|| dual_scaling_jobs(config))),
        (CheckFamily::Russo, Box::new(|| synthetic_jobs(config, CheckFamily::Russo))),
        (CheckFamily::Minkowski, Box::new(|| synthetic_jobs(config, CheckFamily::Minkowski))),
    ];
    let results: Vec<(CheckFamily, Duration, Vec<CheckResult>)> = jobs
        .par_iter()
        .filter(|(f, _)| selected(*f))
        .map(|(f, job)| {
            let start = Instant::now();
            job().map(|r| (*f, start.elapsed(), r))
        })
        .collect::<Result<_>>()?;
    for (f, t, recs) in results {
        *report.runtimes.entry(f.name().to_string()).or_default() += t;
        report.records.extend(recs);
    }
    sort_records(&mut report.records);
    Ok(report)
}

/// Human-readable statement and implemented formula of a check family.
pub fn explain(check: &str) -> Result<String> {
    let family: CheckFamily = check.parse()?;
    let text = match family {
        CheckFamily::Plancherel => {
            "plancherel: Plancherel identity with formal dimension operators.\n\
             statement: the integral over the dual of ||sigma(g) K_sigma^(1/2)||_HS^2 against the Plancherel measure equals ||g||_2^2.\n\
             implemented: lhs = sum over sampled sigma0 of nu(sigma0) * ||M_sigma||_2^2 with M = sqrt(w) k K^(1/2) sqrt(w),\n\
             rhs = sum over grid points of |g(n,t)|^2 w_N(n) Delta_G(t) dt; equality within the relative tolerance."
        }
        CheckFamily::PlancherelRefinement => {
            "plancherel-refinement: convergence of the Plancherel error under grid refinement.\n\
             implemented: the relative Plancherel error of the Gaussian fixture is recomputed on grids with half the spacing\n\
             (same extents); the refined error must not exceed max(coarse error, 1e-12), the floor being double-precision roundoff."
        }
        CheckFamily::HausdorffYoung => {
            "hausdorff-young: Hausdorff-Young inequality on the group extension, A_p(G) <= A_p(N).\n\
             implemented: lhs = (sum_sigma nu(sigma) ||sigma(g) K_sigma^(1/q)||_q^q)^(1/q), rhs = A_p(R^dim N) ||g||_p,\n\
             A_p = (p^(1/p) / q^(1/q))^(d/2) (Babenko-Beckner) or 1 in the classical regime; pass iff lhs <= rhs (1 + tol)."
        }
        CheckFamily::ProofChain => {
            "proof-chain: every intermediate inequality of the Hausdorff-Young argument.\n\
             russo: sum nu ||M||_q^q <= sum nu (||k||_{q,p,q}^q ||k*||_{q,p,q}^q)^(1/2) (Russo cross-norm bound),\n\
             cauchy-schwarz: that sum <= (C1 C2)^(1/2) with C1 = sum nu ||k||_{q,p,q}^q, C2 = sum nu ||k*||_{q,p,q}^q,\n\
             minkowski-kernel / minkowski-adjoint: C1, C2 <= M1 (generalized Minkowski, exponent q/p >= 1), where\n\
             M1 = (sum_s dt Delta(s) [sum_sigma nu sum_xi dt Delta(xi) |<g_s, xi.sigma0>|^q]^(p/q))^(q/p),\n\
             disintegration: M1 equals the same expression with the orbit sum replaced by ||g_s^||_q^q on N^,\n\
             slice-hausdorff-young: that expression <= A_p^q ||g||_p^q (abelian Hausdorff-Young on every slice g_s).\n\
             At p = 2 each link is also checked as an equality."
        }
        CheckFamily::NilpotentBound => {
            "nilpotent-bound: bound for nilpotent groups through the maximal coadjoint orbit dimension.\n\
             implemented on the Heisenberg group: lhs = ||F^p(g)||_{B_q}, rhs = A_p(R)^(dim G - d*/2) ||g||_p with\n\
             dim G = 3, d* = 2, so the exponent is 2 and A_p(R)^2 = A_p(R^2)."
        }
        CheckFamily::SemiInvariance => {
            "semi-invariance: sigma(x) K sigma(x)* = Delta_G(x)^(-1) K for the formal dimension operator K = Delta_G(t).\n\
             implemented: sigma(x) as a shift-and-modulate matrix on the H lattice (zero boundary), compared entrywise with\n\
             the diagonal right side on rows and columns whose preimage stays on the grid; deviation relative to max K."
        }
        CheckFamily::DualMeasureScaling => {
            "dual-measure-scaling: Lebesgue measure of h.A equals Delta_G(h) times the measure of A for boxes A in N^.\n\
             implemented: exact image length (ax+b) or shoelace area of the sheared box (Heisenberg)."
        }
        CheckFamily::Russo => {
            "russo: Russo cross-norm bound ||T_k||_{B_q} <= ||k||_{q,p,q}^(1/2) ||k*||_{q,p,q}^(1/2) on random weighted kernels,\n\
             with ||k||_{q,p,q} = (sum_gamma w_gamma [sum_xi w_xi |k(xi,gamma)|^p]^(q/p))^(1/q)."
        }
        CheckFamily::Minkowski => {
            "minkowski: generalized Minkowski inequality || ||F||_{L^p(dxi)} ||_{L^q(dgamma)} <= || ||F||_{L^q(dgamma)} ||_{L^p(dxi)}\n\
             for q >= p on random nonnegative kernels with positive weights."
        }
        CheckFamily::GaussianExtremality => {
            "gaussian-extremality: Gaussians nearly attain the sharp constant on N.\n\
             implemented: min over significant slices of ||g_s^||_q / ||g_s||_p for the Gaussian fixture must be\n\
             at least (1 - tol) A_p(R^dim N)."
        }
    };
    Ok(text.to_string())
}

/// File stem, seed, spec and serialized bytes of one fixture.
pub type FixtureFile = (String, u64, TestFunctionSpec, Vec<u8>);

/// The fixtures of a configuration, serialized.
pub fn generate_fixtures(config: &RunConfig) -> Result<Vec<FixtureFile>> {
    config.validate()?;
    let grids = make_grids(config.group.model(), config.grid_n, config.grid_h, &config.extents())?;
    config
        .fixture_specs()
        .into_iter()
        .map(|(name, seed, spec)| {
            let g: SampledFunction = sample(&spec, &grids, config.group)?;
            let mut bytes = Vec::new();
            write_fixture(&mut bytes, &g, seed)?;
            Ok((format!("{}-{name}", config.group.name()), seed, spec, bytes))
        })
        .collect()
}
