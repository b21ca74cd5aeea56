//! Batch driver: parses a TOML crystal description and runs one of the
//! analyses of the `crystorus` library on it.

pub mod config;
pub mod fixtures;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;

use crystorus::bundle::{
    check_derivative_gluing, check_section_gluing, covariant_differential, equilibrium_sections,
    holonomy_generators, BundleError, FixedPointSet,
};
use crystorus::exactalg::RatVector;
use crystorus::phonon::{
    invariant_objective_dimension, kpath_sweep, max_stable_dt, project_invariant,
    project_invariant_density, simulate_wave, DensityMatrix, ElasticTensor, PhononError, WaveState,
    DEFAULT_CFL,
};

pub use config::Config;

/// Singular values of the averaging map below this fraction of the largest
/// are treated as zero when counting invariant moduli.
const RANK_THRESHOLD: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("schema error at {0}")]
    Schema(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Domain(String),
    #[error("refused: {0}")]
    Unstable(String),
}

impl CliError {
    /// 1 usage/schema/IO, 2 domain validation, 3 numerical instability.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Schema(_) | CliError::Io { .. } => 1,
            CliError::Domain(_) => 2,
            CliError::Unstable(_) => 3,
        }
    }
}

impl From<PhononError> for CliError {
    fn from(e: PhononError) -> Self {
        match e {
            PhononError::Cfl { .. } => CliError::Unstable(e.to_string()),
            e => CliError::Domain(e.to_string()),
        }
    }
}

impl From<BundleError> for CliError {
    fn from(e: BundleError) -> Self {
        CliError::Domain(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "crystorus", version, about = "Crystallographic groups, flat torus bundles and phonons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file for CSV or dumped configs; standard output if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write the dispersion table even if the medium is unstable.
    #[arg(long, global = true)]
    pub allow_unstable: bool,
    /// Average density and elastic tensor over the point group first.
    #[arg(long, global = true)]
    pub project_invariant: bool,
    /// Overrides k-path samples per segment, simulation grid points and
    /// cells per chart of the section check.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Courant number for the simulation time step.
    #[arg(long, global = true)]
    pub cfl: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Group order, cocycle table and symmorphicity.
    Analyze,
    /// Bundle validation, holonomy and equilibrium sections.
    Holonomy,
    /// Phonon frequencies along the k-path, as CSV.
    Dispersion,
    /// Leapfrog wave simulation; energy series as CSV.
    Simulate,
    /// Built-in configurations.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum FixtureAction {
    List,
    Dump { name: String },
}

/// Runs the parsed command. Reports go to `report`; CSV and dumped configs
/// go to `--out` when given and to `data` otherwise.
pub fn run(cli: &Cli, data: &mut dyn Write, report: &mut dyn Write) -> Result<(), CliError> {
    let text = match &cli.command {
        Command::Fixtures { action } => return run_fixtures(cli, action, data, report),
        Command::Analyze => analyze(&load(cli)?)?,
        Command::Holonomy => holonomy_report(&load(cli)?, cli.samples)?,
        Command::Dispersion => {
            let (csv, summary) = dispersion_csv(&load(cli)?, cli)?;
            emit(cli.out.as_deref(), &csv, data)?;
            summary
        }
        Command::Simulate => {
            let (csv, summary) = simulate_csv(&load(cli)?, cli)?;
            emit(cli.out.as_deref(), &csv, data)?;
            summary
        }
    };
    write_all(report, text.as_bytes(), "<report>")
}

fn load(cli: &Cli) -> Result<Config, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Config::from_toml(&text)
}

fn write_all(w: &mut dyn Write, bytes: &[u8], name: &str) -> Result<(), CliError> {
    w.write_all(bytes).and_then(|_| w.flush()).map_err(|source| CliError::Io {
        path: name.into(),
        source,
    })
}

fn emit(out: Option<&Path>, bytes: &[u8], fallback: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let name = path.display().to_string();
            let file = File::create(path).map_err(|source| CliError::Io {
                path: name.clone(),
                source,
            })?;
            write_all(&mut BufWriter::new(file), bytes, &name)
        }
        None => write_all(fallback, bytes, "<stdout>"),
    }
}

fn run_fixtures(
    cli: &Cli,
    action: &FixtureAction,
    data: &mut dyn Write,
    report: &mut dyn Write,
) -> Result<(), CliError> {
    match action {
        FixtureAction::List => {
            let mut s = String::new();
            for f in fixtures::CATALOG {
                let _ = writeln!(s, "{:<14} {}", f.name, f.summary);
            }
            write_all(report, s.as_bytes(), "<stdout>")
        }
        FixtureAction::Dump { name } => {
            let cfg = fixtures::get(name)
                .ok_or_else(|| CliError::Usage(format!("unknown fixture `{name}`; see `fixtures list`")))?;
            emit(cli.out.as_deref(), cfg.to_toml().as_bytes(), data)
        }
    }
}

fn fmt_matrix(rows: &[Vec<i64>]) -> String {
    let inner: Vec<String> = rows
        .iter()
        .map(|r| format!("[{}]", r.iter().map(i64::to_string).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", inner.join(", "))
}

fn fmt_int_vector(v: &[num_bigint::BigInt]) -> String {
    format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

/// Space-group report: order, elements, cocycle table and splitting.
pub fn analyze(cfg: &Config) -> Result<String, CliError> {
    let sg = cfg.space_group()?;
    let mut s = String::new();
    let _ = writeln!(s, "dimension: {}", sg.dim());
    let _ = writeln!(s, "group order: {}", sg.order());
    for p in 0..sg.order() {
        let m = sg.linear(p).to_i64_rows().expect("point-group entries are small");
        let _ = writeln!(s, "  element {p}: A = {}, a = {}", fmt_matrix(&m), sg.translation(p));
    }
    let mut nonzero = Vec::new();
    for p in 0..sg.order() {
        for q in 0..sg.order() {
            let c = sg.cocycle(p, q).map_err(|e| CliError::Domain(e.to_string()))?;
            if c.iter().any(|x| x.sign() != num_bigint::Sign::NoSign) {
                nonzero.push((p, q, c));
            }
        }
    }
    if nonzero.is_empty() {
        let _ = writeln!(s, "cocycle: all zero");
    } else {
        let _ = writeln!(s, "cocycle (nonzero entries):");
        for (p, q, c) in nonzero {
            let _ = writeln!(s, "  c({p},{q}) = {}", fmt_int_vector(&c));
        }
    }
    let report = sg.verify_cocycle_identity();
    let _ = writeln!(
        s,
        "cocycle identity: {} ({} triples)",
        if report.holds() { "holds" } else { "FAILS" },
        report.triples_checked
    );
    let verdict = sg.is_symmorphic().map_err(|e| CliError::Domain(e.to_string()))?;
    match (verdict.symmorphic, verdict.origin_shift) {
        (true, Some(t)) => {
            let _ = writeln!(s, "symmorphic: yes, witness shift t = {t}");
        }
        _ => {
            let _ = writeln!(s, "symmorphic: no");
        }
    }
    if sg.dim() >= 2 {
        let rs = sg.cartesian_representation().map_err(|e| CliError::Domain(e.to_string()))?;
        let n = invariant_objective_dimension(&rs, RANK_THRESHOLD)?;
        let _ = writeln!(s, "invariant elastic moduli: {n}");
    }
    Ok(s)
}

fn fmt_fixed_set(set: &FixedPointSet) -> String {
    let pts = |v: &[crystorus::crystal::TorusPoint]| {
        v.iter().map(|p| p.coords().to_string()).collect::<Vec<_>>().join(", ")
    };
    match set {
        FixedPointSet::Empty => "empty (no equilibrium section)".into(),
        FixedPointSet::Points(p) => format!("{} point(s): {{{}}}", p.len(), pts(p)),
        FixedPointSet::Subtorus {
            dim,
            directions,
            representatives,
        } => {
            let dirs: Vec<String> = directions.iter().map(RatVector::to_string).collect();
            format!(
                "{} translate(s) of a {dim}-dimensional subtorus spanned by {}; through {{{}}}",
                representatives.len(),
                dirs.join(", "),
                pts(representatives)
            )
        }
    }
}

/// Bundle report: validation, holonomy generators, fixed points, and the
/// gluing residuals of a sampled section when one is configured.
pub fn holonomy_report(cfg: &Config, cells: Option<usize>) -> Result<String, CliError> {
    let sg = cfg.space_group()?;
    let bundle = cfg
        .bundle(sg)?
        .ok_or_else(|| CliError::Schema("bundle: section is required for this command".into()))?;
    let basepoint = cfg.bundle.as_ref().map_or(0, |b| b.basepoint);
    let mut s = String::new();
    let validation = bundle.validate();
    if !validation.is_valid() {
        let _ = writeln!(s, "bundle: INVALID");
        for v in &validation.violations {
            let _ = writeln!(s, "  {v:?}");
        }
        return Err(CliError::Domain(format!("invalid bundle\n{s}")));
    }
    let _ = writeln!(
        s,
        "bundle: valid ({} charts, {} overlaps, {} triangles)",
        bundle.base().charts(),
        bundle.base().edges().len(),
        bundle.base().triangles().len()
    );
    let gens = holonomy_generators(&bundle, basepoint)?;
    let _ = writeln!(s, "holonomy generators at chart {basepoint}: {}", gens.len());
    for (lp, h) in &gens {
        let charts: Vec<String> = std::iter::once(lp.start())
            .chain(lp.steps().iter().map(|&(_, b)| b))
            .map(|c| c.to_string())
            .collect();
        let m = h.linear.to_i64_rows().expect("point-group entries are small");
        let _ = writeln!(
            s,
            "  loop {}: v -> {} v + {}{}",
            charts.join("->"),
            fmt_matrix(&m),
            h.shift,
            if h.is_identity() { " (identity)" } else { "" }
        );
    }
    let fixed = equilibrium_sections(&bundle, basepoint)?;
    let _ = writeln!(s, "fixed points: {}", fmt_fixed_set(&fixed));

    let Some(section_cfg) = cfg.bundle.as_ref().and_then(|b| b.section.as_ref()) else {
        return Ok(s);
    };
    let cover = cfg.circle_cover(cells)?.expect("section configured");
    if fixed.is_empty() {
        let _ = writeln!(s, "section: skipped, no compatible section exists");
        return Ok(s);
    }
    // a compatible section needs the cyclic base of the cover
    if bundle.base() != &cover.base() {
        return Err(CliError::Domain(
            "bundle.section: needs the cyclic base 0->1->...->n-1->0".into(),
        ));
    }
    let field = cover.compatible_section(&bundle, section_cfg.amplitude)?;
    let glue = check_section_gluing(&bundle, &field, 1e-12)?;
    let _ = writeln!(
        s,
        "section gluing: {} (max residual {:e}, h = {:e})",
        if glue.passed() { "pass" } else { "FAIL" },
        glue.max_residual(),
        cover.spacing()
    );
    for e in &glue.edges {
        let lambda = e
            .lattice_vector
            .as_ref()
            .map_or("?".to_string(), |v| format!("{v:?}"));
        let _ = writeln!(
            s,
            "  {}->{}: element {}, shift {}, lattice vector {lambda}, residual {:e}",
            e.from, e.to, e.element, e.shift, e.max_residual
        );
    }
    let diff = covariant_differential(&field)?;
    let dglue = check_derivative_gluing(&bundle, &diff, section_cfg.derivative_tolerance)?;
    let _ = writeln!(
        s,
        "derivative gluing: {} (max residual {:e}, interior {:e}, tolerance {:e})",
        if dglue.passed() { "pass" } else { "FAIL" },
        dglue.max_residual(),
        dglue.interior_residual(),
        section_cfg.derivative_tolerance
    );
    // the same residual over the linear part shows that translations drop out
    let linear = bundle.with_space_group(bundle.space_group().linear_part())?;
    let lglue = check_derivative_gluing(&linear, &diff, section_cfg.derivative_tolerance)?;
    let _ = writeln!(
        s,
        "derivative gluing without translations: max residual {:e}",
        lglue.max_residual()
    );
    if !glue.passed() {
        return Err(CliError::Domain(format!("section gluing failed\n{s}")));
    }
    Ok(s)
}

/// Density and tensor, averaged over the Cartesian point group on request,
/// with the closed-form stability verdict when one applies.
fn medium(cfg: &Config, project: bool) -> Result<(DensityMatrix, ElasticTensor, Option<bool>), CliError> {
    let (rho, c, stable) = cfg.elasticity()?;
    if !project {
        return Ok((rho, c, stable));
    }
    let sg = cfg.space_group()?;
    let rs: Vec<DMatrix<f64>> = sg
        .cartesian_representation()
        .map_err(|e| CliError::Domain(e.to_string()))?;
    Ok((project_invariant_density(&rho, &rs)?, project_invariant(&c, &rs)?, stable))
}

/// Dispersion CSV bytes and a short summary.
pub fn dispersion_csv(cfg: &Config, cli: &Cli) -> Result<(Vec<u8>, String), CliError> {
    let kpath = cfg
        .kpath
        .as_ref()
        .ok_or_else(|| CliError::Schema("kpath: section is required for this command".into()))?;
    let (rho, c, stable) = medium(cfg, cli.project_invariant)?;
    let samples = cli.samples.unwrap_or(kpath.samples);
    let table = kpath_sweep(&rho, &c, &kpath.waypoints, samples)?;
    let unstable_rows = table.rows.iter().filter(|r| r.unstable).count();
    if !cli.allow_unstable {
        if stable == Some(false) {
            return Err(CliError::Unstable(
                "moduli violate the stability conditions; pass --allow-unstable to write the table anyway".into(),
            ));
        }
        if unstable_rows > 0 {
            return Err(CliError::Unstable(format!(
                "{unstable_rows} k-point(s) have negative ω²; pass --allow-unstable to write the table anyway"
            )));
        }
    }
    let mut buf = Vec::new();
    table
        .write_csv(&mut buf)
        .map_err(|e| CliError::Domain(format!("csv: {e}")))?;
    let summary = format!(
        "dispersion: {} k-points, {} unstable{}\n",
        table.rows.len(),
        unstable_rows,
        if cli.project_invariant { ", tensor projected onto the point-group invariants" } else { "" }
    );
    Ok((buf, summary))
}

/// Energy CSV bytes and the frequency summary.
pub fn simulate_csv(cfg: &Config, cli: &Cli) -> Result<(Vec<u8>, String), CliError> {
    let sim = cfg
        .simulation
        .as_ref()
        .ok_or_else(|| CliError::Schema("simulation: section is required for this command".into()))?;
    let (rho, c, _) = medium(cfg, cli.project_invariant)?;
    let norm = sim.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(CliError::Schema("simulation.direction: must be a nonzero vector".into()));
    }
    let direction: Vec<f64> = sim.direction.iter().map(|x| x / norm).collect();
    let points = cli.samples.unwrap_or(sim.points);
    let state = WaveState::plane_wave(
        &rho,
        &c,
        direction.clone(),
        points,
        sim.length,
        sim.mode,
        sim.branch,
        sim.amplitude,
    )?;
    let cfl = cli.cfl.or(sim.cfl).unwrap_or(DEFAULT_CFL);
    let dt = match sim.dt {
        Some(dt) => dt,
        None => {
            let max = max_stable_dt(&rho, &c, &direction, state.spacing(), cfl)?;
            if !max.is_finite() {
                return Err(CliError::Domain("medium has no stiffness along the direction; set simulation.dt".into()));
            }
            max
        }
    };
    let traj = simulate_wave(&rho, &c, &state, dt, sim.steps, cfl)?;
    let mut buf = Vec::new();
    traj.write_energy_csv(&mut buf)
        .map_err(|e| CliError::Domain(format!("csv: {e}")))?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "simulation: {} points, {} steps, dt = {:e}, wavenumber = {}",
        points, sim.steps, traj.dt, traj.wavenumber
    );
    let _ = writeln!(s, "relative energy drift: {:e}", traj.relative_energy_drift());
    for m in &traj.modes {
        match m.observed {
            Some(obs) => {
                let err = if m.predicted != 0.0 { (obs - m.predicted).abs() / m.predicted } else { f64::NAN };
                let _ = writeln!(
                    s,
                    "  branch {}: predicted ω = {}, observed ω = {}, relative error {:e}",
                    m.branch, m.predicted, obs, err
                );
            }
            None => {
                let _ = writeln!(s, "  branch {}: predicted ω = {}, not excited", m.branch, m.predicted);
            }
        }
    }
    Ok((buf, s))
}
