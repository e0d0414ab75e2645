//! Command-line front end: argument parsing, dispatch and result tables.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::budget::{self, ErrorBudgetInput};
use crate::capnet::{cc_insensitivity_scan, ratio_leading_order, CapacitanceNetwork};
use crate::composite::{build_modes, diagonalize, label_of_index, DeviceSpec, Label, TRACKED};
use crate::config::load_device;
use crate::error::{Error, Result};
use crate::output::{self, Cell, Format, Table};
use crate::pulse::{self, CalibrationOptions, DrivenSystem, PhaseMode, Preparation};
use crate::rb::{self, Channel, GateNoise, RbSpec};
use crate::zz;

#[derive(Debug, Parser)]
#[command(name = "ftf", version, about = "Fluxonium-transmon-fluxonium circuit simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Bundled device name (device_a, device_b) or path to a TOML device file.
    #[arg(long, default_value = "device_a")]
    pub config: String,
    /// Output file; defaults to $FTF_OUT_DIR/<command>.<ext> when that is set, else stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Seed for every stochastic step; recorded in the output header.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dressed eigenenergies with product-state labels.
    Spectrum(SpectrumArgs),
    /// Static ZZ rate versus coupler flux (exact diagonalization).
    ZzFlux(ZzFluxArgs),
    /// Static ZZ rate over a grid of coupler and direct couplings.
    ZzLandscape(ZzLandscapeArgs),
    /// Perturbative ZZ orders and expansion coefficients.
    ZzPt(ZzPtArgs),
    /// Couplings implied by a capacitance network.
    Capnet(CapnetArgs),
    /// Square-pulse population map over carrier detuning and duration.
    Chevron(ChevronArgs),
    /// Automated calibration of a full-cycle CZ.
    CalibrateCz(CalibrateArgs),
    /// Closed-form gate-error budget and tolerances.
    ErrorBudget(BudgetArgs),
    /// Standard randomized benchmarking with a noise channel.
    Rb(RbArgs),
    /// Interleaved randomized benchmarking of a CZ with relaxation-induced leakage.
    Irb(IrbArgs),
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    /// Coupler flux in units of Phi_0 (defaults to the config value).
    #[arg(long)]
    pub coupler_flux: Option<f64>,
    /// Set every coupling to zero.
    #[arg(long)]
    pub uncoupled: bool,
    /// Number of levels to report.
    #[arg(long, default_value_t = 20)]
    pub count: usize,
}

#[derive(Debug, Args)]
pub struct ZzFluxArgs {
    #[command(flatten)]
    pub common: Common,
    /// First coupler flux (Phi_0).
    #[arg(long, default_value_t = 0.5)]
    pub from: f64,
    /// Last coupler flux (Phi_0).
    #[arg(long, default_value_t = 1.0)]
    pub to: f64,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct ZzLandscapeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Coupler flux (Phi_0; defaults to the config value).
    #[arg(long)]
    pub coupler_flux: Option<f64>,
    /// Coupler couplings J1c = J2c: start (GHz).
    #[arg(long, default_value_t = 0.2)]
    pub jc_from: f64,
    #[arg(long, default_value_t = 1.0)]
    pub jc_to: f64,
    #[arg(long, default_value_t = 5)]
    pub jc_points: usize,
    /// Direct coupling J12: start (GHz).
    #[arg(long, default_value_t = 0.0)]
    pub j12_from: f64,
    #[arg(long, default_value_t = 0.4)]
    pub j12_to: f64,
    #[arg(long, default_value_t = 9)]
    pub j12_points: usize,
}

#[derive(Debug, Args)]
pub struct ZzPtArgs {
    #[command(flatten)]
    pub common: Common,
    /// Coupler flux (Phi_0; defaults to the config value).
    #[arg(long)]
    pub coupler_flux: Option<f64>,
    /// Highest order kept (2, 3 or 4).
    #[arg(long, default_value_t = 4)]
    pub max_order: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TopologyArg {
    Grounded,
    Differential,
}

#[derive(Debug, Args)]
pub struct CapnetArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = TopologyArg::Grounded)]
    pub topology: TopologyArg,
    /// Grounded coupler capacitance (fF).
    #[arg(long, default_value_t = 45.0)]
    pub c_t: f64,
    /// Differential coupler pad capacitance to ground (fF).
    #[arg(long, default_value_t = 45.0)]
    pub c_t1: f64,
    /// Differential coupler pad-to-pad capacitance (fF).
    #[arg(long, default_value_t = 10.0)]
    pub c_t2: f64,
    /// Fluxonium pad capacitance to ground (fF).
    #[arg(long, default_value_t = 11.0)]
    pub c_f1: f64,
    /// Fluxonium pad-to-pad capacitance (fF).
    #[arg(long, default_value_t = 2.8)]
    pub c_f2: f64,
    /// Fluxonium-coupler capacitance (fF).
    #[arg(long, default_value_t = 8.49)]
    pub c_c: f64,
    /// Scan C_c over [c_c_from, c_c_to] with this many points instead of a single network.
    #[arg(long)]
    pub scan_points: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub c_c_from: f64,
    #[arg(long, default_value_t = 12.0)]
    pub c_c_to: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PhaseModeArg {
    Equal,
    Constructive,
}

impl From<PhaseModeArg> for PhaseMode {
    fn from(p: PhaseModeArg) -> Self {
        match p {
            PhaseModeArg::Equal => PhaseMode::Equal,
            PhaseModeArg::Constructive => PhaseMode::Constructive,
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct DriveArgs {
    /// Coupler flux (Phi_0).
    #[arg(long, default_value_t = 0.575)]
    pub coupler_flux: f64,
    /// Initial computational state of the gate transition.
    #[arg(long, default_value = "101")]
    pub from: Label,
    /// Final state of the gate transition.
    #[arg(long, default_value = "102")]
    pub to: Label,
    /// Drive photons above the computational band kept in the dressed subspace.
    #[arg(long, default_value_t = 3.0)]
    pub photons: f64,
    /// Carrier samples per period of the time grid.
    #[arg(long, default_value_t = pulse::DEFAULT_SAMPLES_PER_PERIOD)]
    pub samples_per_period: f64,
    #[arg(long, value_enum, default_value_t = PhaseModeArg::Equal)]
    pub phase_mode: PhaseModeArg,
}

#[derive(Debug, Args)]
pub struct ChevronArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub drive: DriveArgs,
    /// Rabi rate on the gate transition (MHz).
    #[arg(long, default_value_t = 10.0)]
    pub rabi_mhz: f64,
    /// Half width of the detuning window (MHz).
    #[arg(long, default_value_t = 20.0)]
    pub span_mhz: f64,
    #[arg(long, default_value_t = 21)]
    pub freq_points: usize,
    /// Longest pulse (ns).
    #[arg(long, default_value_t = 200.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 41)]
    pub t_points: usize,
    /// Population prepared in the stray state instead of the initial state.
    #[arg(long, default_value_t = 0.0)]
    pub stray_population: f64,
    #[arg(long, default_value = "001")]
    pub stray: Label,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub drive: DriveArgs,
    /// Gate width (ns).
    #[arg(long, default_value_t = 85.0)]
    pub width: f64,
    /// Amplitude / frequency alternations.
    #[arg(long, default_value_t = 3)]
    pub alternations: usize,
    /// Half width of the frequency search window (MHz).
    #[arg(long, default_value_t = 30.0)]
    pub window_mhz: f64,
    /// Points of the initial amplitude scan.
    #[arg(long, default_value_t = 7)]
    pub coarse_points: usize,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    #[command(flatten)]
    pub common: Common,
    /// Gate duration (ns).
    #[arg(long, default_value_t = 85.0)]
    pub gate_ns: f64,
    /// Relaxation time of the non-computational level (us).
    #[arg(long, default_value_t = 10.0)]
    pub t1_alpha_us: f64,
    #[arg(long, default_value_t = 560.0)]
    pub t1_us: f64,
    #[arg(long, default_value_t = 200.0)]
    pub tphi_us: f64,
    /// Conditional-phase error (degrees).
    #[arg(long, default_value_t = 0.0)]
    pub dphi_deg: f64,
    /// Rotation-angle error (degrees).
    #[arg(long, default_value_t = 0.0)]
    pub dtheta_deg: f64,
    /// Computational subspace dimension (2 or 4).
    #[arg(long, default_value_t = 4)]
    pub n: u32,
    /// Fidelities for which tolerances are listed.
    #[arg(long, value_delimiter = ',', default_values_t = [0.999, 0.9999])]
    pub targets: Vec<f64>,
    /// Gate width used for the frequency tolerances (ns).
    #[arg(long, default_value_t = budget::DEFAULT_TOLERANCE_GATE_NS)]
    pub tolerance_gate_ns: f64,
}

#[derive(Debug, Args)]
pub struct RbArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1)]
    pub qubits: u32,
    /// Sequence lengths (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 5, 10, 20, 40, 60, 80, 100, 150, 200])]
    pub lengths: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub randomizations: usize,
    /// Depolarizing parameter applied after every Clifford.
    #[arg(long, default_value_t = 0.995)]
    pub depolarizing: f64,
    /// Depolarizing parameter after every single-qubit gate instead (per-gate mode).
    #[arg(long)]
    pub gate_single: Option<f64>,
    /// Depolarizing parameter after every CZ in per-gate mode.
    #[arg(long, default_value_t = 1.0)]
    pub gate_cz: f64,
    /// Measurement shots per sequence (exact probabilities when absent).
    #[arg(long)]
    pub shots: Option<u32>,
}

#[derive(Debug, Args)]
pub struct IrbArgs {
    #[command(flatten)]
    pub common: Common,
    /// Relaxation time of the non-computational level (us).
    #[arg(long, default_value_t = 10.0)]
    pub t1_alpha_us: f64,
    /// CZ duration (ns).
    #[arg(long, default_value_t = 85.0)]
    pub gate_ns: f64,
    /// Depolarizing parameter of the reference Cliffords.
    #[arg(long, default_value_t = 0.99)]
    pub p_ref: f64,
    #[arg(long, default_value_t = 20)]
    pub randomizations: usize,
    /// Sequence lengths (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = rb::sim::DEFAULT_LENGTHS.to_vec())]
    pub lengths: Vec<usize>,
}

fn header(t: &mut Table, command: &str, common: &Common, hash: &str) {
    t.meta("command", command)
        .meta("config", &common.config)
        .meta("config_hash", hash)
        .meta("seed", common.seed)
        .meta("version", env!("CARGO_PKG_VERSION"));
}

fn device(common: &Common) -> Result<(DeviceSpec, String)> {
    load_device(&common.config).map_err(|e| e.within("config"))
}

fn linspace(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    match n {
        0 => Err(Error::invalid("points", "must be >= 1")),
        1 => Ok(vec![a]),
        _ => Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()),
    }
}

/// Run one parsed command, returning its table and the common flags.
pub fn execute(command: &Command) -> Result<(Table, Common, &'static str)> {
    match command {
        Command::Spectrum(a) => Ok((spectrum(a)?, a.common.clone(), "spectrum")),
        Command::ZzFlux(a) => Ok((zz_flux(a)?, a.common.clone(), "zz-flux")),
        Command::ZzLandscape(a) => Ok((zz_landscape(a)?, a.common.clone(), "zz-landscape")),
        Command::ZzPt(a) => Ok((zz_pt(a)?, a.common.clone(), "zz-pt")),
        Command::Capnet(a) => Ok((capnet(a)?, a.common.clone(), "capnet")),
        Command::Chevron(a) => Ok((chevron(a)?, a.common.clone(), "chevron")),
        Command::CalibrateCz(a) => Ok((calibrate(a)?, a.common.clone(), "calibrate-cz")),
        Command::ErrorBudget(a) => Ok((error_budget(a)?, a.common.clone(), "error-budget")),
        Command::Rb(a) => Ok((rb_cmd(a)?, a.common.clone(), "rb")),
        Command::Irb(a) => Ok((irb_cmd(a)?, a.common.clone(), "irb")),
    }
}

/// Parse `args`, run, and write the output. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = execute(&cli.command).and_then(|(table, common, name)| {
        let dest = output::destination(common.out.as_deref(), name, common.format);
        output::write(&table, common.format, dest.as_deref())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn spectrum(a: &SpectrumArgs) -> Result<Table> {
    let (mut d, hash) = device(&a.common)?;
    if let Some(f) = a.coupler_flux {
        d = d.with_coupler_flux(f);
    }
    if a.uncoupled {
        d = d.uncoupled();
    }
    let sys = diagonalize(&d).map_err(|e| e.within("composite"))?;
    let modes = build_modes(&d).map_err(|e| e.within("qubit"))?;
    let asm = &sys.assembled;
    let mut t = Table::new(&[
        ("level", ""),
        ("energy", "GHz"),
        ("label", ""),
        ("overlap", ""),
        ("bare_energy", "GHz"),
    ]);
    header(&mut t, "spectrum", &a.common, &hash);
    t.meta("coupler_flux_phi0", d.coupler_flux()).meta("uncoupled", a.uncoupled);
    t.summary("fluxonium1_omega01", modes.f1.omega01(), "GHz")
        .summary("coupler_omega01", modes.c.omega01(), "GHz")
        .summary("fluxonium2_omega01", modes.f2.omega01(), "GHz");
    let (e0, b0) = (sys.energies[0], asm.bare[0]);
    for k in 0..a.count.min(sys.energies.len()) {
        let col = sys.vectors.column(k);
        let i = col.iamax();
        let l = label_of_index(asm.dims, i);
        t.push(vec![
            k.into(),
            (sys.energies[k] - e0).into(),
            l.to_string().into(),
            (col[i] * col[i]).into(),
            (asm.bare[i] - b0).into(),
        ]);
    }
    Ok(t)
}

fn zz_flux(a: &ZzFluxArgs) -> Result<Table> {
    let (d, hash) = device(&a.common)?;
    let fluxes = linspace(a.from, a.to, a.points)?;
    let z = zz::zz_flux_sweep(&d, &fluxes).map_err(|e| e.within("zz"))?;
    let mut t = Table::new(&[("coupler_flux", "Phi0"), ("zeta", "kHz")]);
    header(&mut t, "zz-flux", &a.common, &hash);
    for (f, z) in fluxes.iter().zip(z) {
        t.push(vec![(*f).into(), z.into()]);
    }
    Ok(t)
}

fn zz_landscape(a: &ZzLandscapeArgs) -> Result<Table> {
    let (mut d, hash) = device(&a.common)?;
    if let Some(f) = a.coupler_flux {
        d = d.with_coupler_flux(f);
    }
    let jc = linspace(a.jc_from, a.jc_to, a.jc_points)?;
    let j12 = linspace(a.j12_from, a.j12_to, a.j12_points)?;
    let l = zz::zz_landscape(&d, &jc, &j12).map_err(|e| e.within("zz"))?;
    let mut t = Table::new(&[("j_c", "GHz"), ("j_12", "GHz"), ("zeta", "kHz"), ("parabola_j_12", "GHz")]);
    header(&mut t, "zz-landscape", &a.common, &hash);
    t.meta("coupler_flux_phi0", d.coupler_flux());
    for (i, &c) in l.j_c.iter().enumerate() {
        for (j, &x) in l.j_12.iter().enumerate() {
            t.push(vec![c.into(), x.into(), l.zeta_khz[i][j].into(), l.parabola_j12[i].into()]);
        }
    }
    Ok(t)
}

fn zz_pt(a: &ZzPtArgs) -> Result<Table> {
    let (mut d, hash) = device(&a.common)?;
    if let Some(f) = a.coupler_flux {
        d = d.with_coupler_flux(f);
    }
    let x = zz::zz_perturbative(&d, a.max_order).map_err(|e| e.within("zz"))?;
    let mut t = Table::new(&[("quantity", ""), ("value", ""), ("unit", "")]);
    header(&mut t, "zz-pt", &a.common, &hash);
    t.meta("coupler_flux_phi0", d.coupler_flux()).meta("max_order", a.max_order);
    let mut row = |k: &str, v: f64, u: &str| t.push(vec![k.into(), v.into(), u.into()]);
    row("zeta_exact", x.zeta_exact_khz, "kHz");
    for (o, v) in x.per_order_khz.iter().enumerate() {
        row(&format!("zeta_order{}", o + 2), *v, "kHz");
    }
    row("zeta_perturbative", x.perturbative_total_khz(), "kHz");
    row("z2", x.coefficients[0], "1/GHz");
    row("z3", x.coefficients[1], "1/GHz^2");
    row("z4", x.coefficients[2], "1/GHz^3");
    row("optimal_ratio", x.optimal_ratio(), "GHz");
    row("zeta_min_coefficient", x.zeta_min_coefficient(), "1/GHz^3");
    for g in &x.degenerate {
        t.summary(&format!("excluded.{}->{}", g.state, g.intermediate), g.detuning_ghz, "GHz");
    }
    Ok(t)
}

fn capnet(a: &CapnetArgs) -> Result<Table> {
    let net = match a.topology {
        TopologyArg::Grounded => CapacitanceNetwork::grounded(a.c_t, a.c_f1, a.c_f2, a.c_c),
        TopologyArg::Differential => CapacitanceNetwork::differential(a.c_t1, a.c_t2, a.c_f1, a.c_f2, a.c_c),
    };
    let ctx = |e: Error| e.within("capnet");
    let (_, hash) = device(&a.common)?;
    let hash = hash.as_str();
    if let Some(n) = a.scan_points {
        let grid = linspace(a.c_c_from, a.c_c_to, n)?;
        let s = cc_insensitivity_scan(&net, &grid).map_err(ctx)?;
        let mut t = Table::new(&[("c_c", "fF"), ("ratio", "GHz"), ("j_c", "GHz")]);
        header(&mut t, "capnet", &a.common, hash);
        t.summary("ratio_variation", s.ratio_variation, "").summary("j_c_variation", s.j_c_variation, "");
        t.summary("ratio_leading_order", ratio_leading_order(&net), "GHz");
        for i in 0..grid.len() {
            t.push(vec![s.c_c[i].into(), s.ratio[i].into(), s.j_c[i].into()]);
        }
        return Ok(t);
    }
    let k = net.couplings().map_err(ctx)?;
    let mut t = Table::new(&[("quantity", ""), ("value", ""), ("unit", "")]);
    header(&mut t, "capnet", &a.common, hash);
    let mut row = |q: &str, v: f64, u: &str| t.push(vec![q.into(), v.into(), u.into()]);
    row("j_1c", k.j_1c, "GHz");
    row("j_2c", k.j_2c, "GHz");
    row("j_12", k.j_12, "GHz");
    row("ratio_exact", k.ratio, "GHz");
    row("ratio_leading_order", ratio_leading_order(&net), "GHz");
    row("sum_mode_coupling", k.sum_mode_coupling, "");
    Ok(t)
}

fn driven(d: &DeviceSpec, drive: &DriveArgs) -> Result<(DrivenSystem, f64)> {
    DrivenSystem::for_transition(&d.with_coupler_flux(drive.coupler_flux), drive.from, drive.to, drive.photons)
        .map_err(|e| e.within("pulse"))
}

fn chevron(a: &ChevronArgs) -> Result<Table> {
    let (d, hash) = device(&a.common)?;
    let (sys, f0) = driven(&d, &a.drive)?;
    let (i, f) = (sys.index(a.drive.from)?, sys.index(a.drive.to)?);
    let drives = pulse::phase_setting(&sys, a.drive.phase_mode.into(), f0, i, f);
    let m = sys.drive_element(&drives, f, i).norm();
    if m == 0.0 {
        return Err(Error::invalid("from/to", "transition has no drive element").within("pulse"));
    }
    let amp = a.rabi_mhz * 1e-3 / m;
    let det = linspace(-a.span_mhz, a.span_mhz, a.freq_points)?;
    let freqs: Vec<f64> = det.iter().map(|x| f0 + x * 1e-3).collect();
    let times = linspace(0.0, a.t_max, a.t_points)?;
    let prep = if a.stray_population > 0.0 {
        Preparation::mixed(a.drive.from, a.stray, a.stray_population)
    } else {
        Preparation::pure(a.drive.from)
    };
    let c = pulse::chevron_scan(&sys, &drives, amp, &freqs, &times, &prep, a.drive.samples_per_period)
        .map_err(|e| e.within("pulse"))?;
    let mut t = Table::new(&[("detuning", "MHz"), ("duration", "ns"), ("p_leave", "")]);
    header(&mut t, "chevron", &a.common, &hash);
    t.meta("coupler_flux_phi0", a.drive.coupler_flux).meta("transition", format!("{}->{}", a.drive.from, a.drive.to));
    t.summary("frequency", f0, "GHz").summary("amplitude", amp, "GHz").summary("subspace_dim", sys.dim(), "");
    for (k, x) in det.iter().enumerate() {
        for (j, tt) in c.durations.iter().enumerate() {
            t.push(vec![(*x).into(), (*tt).into(), c.p_leave[k][j].into()]);
        }
    }
    Ok(t)
}

fn calibrate(a: &CalibrateArgs) -> Result<Table> {
    let (d, hash) = device(&a.common)?;
    let (sys, _) = driven(&d, &a.drive)?;
    let opts = CalibrationOptions {
        width: a.width,
        alternations: a.alternations,
        frequency_window: a.window_mhz * 1e-3,
        samples_per_period: a.drive.samples_per_period,
        phase_mode: a.drive.phase_mode.into(),
        coarse_points: a.coarse_points,
    };
    let c = pulse::calibrate_cz(&sys, a.drive.from, a.drive.to, &opts).map_err(|e| e.within("pulse"))?;
    let mut t = Table::new(&[("quantity", ""), ("value", ""), ("unit", "")]);
    header(&mut t, "calibrate-cz", &a.common, &hash);
    t.meta("coupler_flux_phi0", a.drive.coupler_flux)
        .meta("transition", format!("{}->{}", c.from, c.to))
        .meta("subspace_dim", sys.dim());
    let mut row = |q: &str, v: Cell, u: &str| t.push(vec![q.into(), v, u.into()]);
    row("width", c.width.into(), "ns");
    row("bare_frequency", c.bare_frequency.into(), "GHz");
    row("frequency", c.frequency.into(), "GHz");
    row("amplitude", c.amplitude.into(), "GHz");
    row("relative_phase", c.relative_phase.into(), "rad");
    row("virtual_z1", c.virtual_z[0].into(), "rad");
    row("virtual_z2", c.virtual_z[1].into(), "rad");
    row("leakage", c.leakage.into(), "");
    row("return_deficit", c.return_deficit.into(), "");
    row("conditional_phase", c.conditional_phase.into(), "rad");
    row("conditional_phase_error", c.conditional_phase_error.into(), "rad");
    row("coherent_fidelity", c.coherent_fidelity.into(), "");
    for (k, l) in ["00", "10", "01", "11"].iter().enumerate() {
        row(&format!("cz_squared_population_{l}"), c.cz_squared_populations[k].into(), "");
    }
    row("cz_squared_phase", c.cz_squared_phase.into(), "rad");
    row("unitarity_defect", c.unitarity_defect.into(), "");
    row("step_change", c.step_change.into(), "");
    row("steps", c.steps.into(), "");
    row("evaluations", c.evaluations.into(), "");
    for (l, p) in &c.leakage_by_state {
        if TRACKED.contains(l) || *p > 1e-8 {
            row(&format!("population_{l}"), (*p).into(), "");
        }
    }
    for (k, r) in c.rounds.iter().enumerate() {
        row(&format!("round{}_amplitude", k + 1), r.amplitude.into(), "GHz");
        row(&format!("round{}_frequency", k + 1), r.frequency.into(), "GHz");
        row(&format!("round{}_return_deficit", k + 1), r.return_deficit.into(), "");
        row(&format!("round{}_conditional_phase", k + 1), r.conditional_phase.into(), "rad");
    }
    Ok(t)
}

fn error_budget(a: &BudgetArgs) -> Result<Table> {
    let input = ErrorBudgetInput {
        t_g_ns: a.gate_ns,
        t1_alpha_us: a.t1_alpha_us,
        t1_us: a.t1_us,
        t_phi_us: a.tphi_us,
        dphi: a.dphi_deg.to_radians(),
        dtheta: a.dtheta_deg.to_radians(),
        n: a.n,
    };
    let (_, hash) = device(&a.common)?;
    let b = budget::error_budget(&input).map_err(|e| e.within("budget"))?;
    let mut t = Table::new(&[("quantity", ""), ("value", ""), ("unit", "")]);
    header(&mut t, "error-budget", &a.common, &hash);
    t.meta("gate_ns", a.gate_ns).meta("tolerance_gate_ns", a.tolerance_gate_ns);
    let mut row = |q: String, v: Cell, u: &str| t.push(vec![q.into(), v, u.into()]);
    row("f_leakage_relaxation".into(), b.leakage_relaxation.into(), "");
    row("f_phase".into(), b.phase.into(), "");
    row("f_amplitude".into(), b.amplitude.into(), "");
    row("f_coherence".into(), b.coherence.into(), "");
    row("total_error".into(), b.total_error.into(), "");
    row("regime_warning".into(), b.regime_warning.into(), "");
    for &f in &a.targets {
        if !(0.7..=1.0).contains(&f) {
            return Err(Error::invalid("targets", "fidelities must lie in [0.7, 1]").within("budget"));
        }
        row(format!("phase_tolerance@{f}"), budget::phase_tolerance(f).to_degrees().into(), "deg");
        row(format!("amplitude_tolerance@{f}"), budget::amplitude_tolerance(f).to_degrees().into(), "deg");
        row(format!("frequency_tolerance@{f}"), budget::frequency_tolerance(f, a.tolerance_gate_ns).into(), "MHz");
    }
    Ok(t)
}

fn rb_cmd(a: &RbArgs) -> Result<Table> {
    let (_, hash) = device(&a.common)?;
    let mut spec = RbSpec::new(a.qubits, a.lengths.clone(), a.randomizations, a.common.seed);
    spec.shots = a.shots;
    match a.gate_single {
        Some(s) => spec.gate_noise = Some(GateNoise { single: s, cz: a.gate_cz }),
        None => spec.clifford_noise = Channel::Depolarizing(a.depolarizing),
    }
    let r = rb::simulate_rb(&spec).map_err(|e| e.within("rb"))?;
    let mut t = Table::new(&[("length", ""), ("survival", ""), ("survival_sem", "")]);
    header(&mut t, "rb", &a.common, &hash);
    t.meta("qubits", a.qubits).meta("randomizations", a.randomizations);
    t.summary("fit.a", r.fit.a, "")
        .summary("fit.p", r.fit.p, "")
        .summary("fit.p_err", r.fit.p_err, "")
        .summary("fit.b", r.fit.b, "")
        .summary("f_clifford", r.f_clifford, "")
        .summary("f_clifford_err", r.f_clifford_err, "")
        .summary("gates_per_clifford", r.gates_per_clifford, "")
        .summary("f_gate", r.f_gate, "")
        .summary("f_gate_err", r.f_gate_err, "");
    for i in 0..r.lengths.len() {
        t.push(vec![r.lengths[i].into(), r.survival[i].into(), r.survival_sem[i].into()]);
    }
    Ok(t)
}

fn irb_cmd(a: &IrbArgs) -> Result<Table> {
    let (_, hash) = device(&a.common)?;
    if !(a.gate_ns > 0.0 && a.t1_alpha_us > 0.0) {
        return Err(Error::invalid("gate_ns/t1_alpha_us", "must be > 0").within("rb"));
    }
    let x = a.gate_ns / (a.t1_alpha_us * 1e3);
    let mut spec = rb::cz_leakage_irb_spec(x, a.p_ref, a.randomizations, a.common.seed);
    spec.lengths = a.lengths.clone();
    let r = rb::simulate_irb(&spec).map_err(|e| e.within("rb"))?;
    let mut t = Table::new(&[
        ("length", ""),
        ("reference_survival", ""),
        ("reference_sem", ""),
        ("interleaved_survival", ""),
        ("interleaved_sem", ""),
        ("computational_population", ""),
    ]);
    header(&mut t, "irb", &a.common, &hash);
    t.meta("randomizations", a.randomizations).meta("t_g_over_t1_alpha", x);
    t.summary("p_reference", r.reference.fit.p, "")
        .summary("p_reference_err", r.reference.fit.p_err, "")
        .summary("p_interleaved", r.p_interleaved, "")
        .summary("p_interleaved_err", r.p_interleaved_err, "")
        .summary("leakage_per_gate", r.leakage.leakage_rate, "")
        .summary("f_cz", r.f_gate, "")
        .summary("f_cz_err", r.f_gate_err, "")
        .summary("f_cz_no_leakage_model", r.f_gate_plain, "")
        .summary("f_cz_closed_form", budget::leakage_relaxation_fidelity(a.gate_ns, a.t1_alpha_us).fidelity, "");
    let (re, it) = (&r.reference, &r.interleaved);
    for i in 0..re.lengths.len() {
        t.push(vec![
            re.lengths[i].into(),
            re.survival[i].into(),
            re.survival_sem[i].into(),
            it.survival[i].into(),
            it.survival_sem[i].into(),
            it.population[i].into(),
        ]);
    }
    Ok(t)
}
