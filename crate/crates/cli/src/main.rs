use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use squid_horizon::circuit::validity_report;
use squid_horizon::config::{load_config, ConfigError, Emit, RunConfig, Scenario};
use squid_horizon::dispersion::{front_spectrum, measure_dispersion, DispersionCurve};
use squid_horizon::experiments::{
    reproduce_fig2, reproduce_fig3, run_sweep, temperature_budget, wavepacket_trapping, SweepSpec,
    TrappingScenario,
};
use squid_horizon::geometry::{find_horizons, velocity_profile_window};
use squid_horizon::io::{self, LinePlot, Series};
use squid_horizon::lattice::{run, LatticeState};
use squid_horizon::Error;

const OUT_ENV: &str = "SQUID_HORIZON_OUT";

#[derive(Parser)]
#[command(name = "squid-horizon", version, about = "Analogue horizons in flux-biased SQUID arrays")]
struct Cli {
    /// JSON configuration file; the shipped defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (falls back to $SQUID_HORIZON_OUT, then the config).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and dispersion runs.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Comma-separated output kinds: csv, svg, bin.
    #[arg(long, global = true, value_delimiter = ',', value_name = "KINDS")]
    emit: Option<Vec<Emit>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the model's validity conditions for the configured pulse.
    Validate,
    /// Comoving velocity profile, horizons and Hawking temperature.
    Profile,
    /// Time-domain lattice run.
    Simulate,
    /// Measured against analytic dispersion relation.
    Dispersion,
    /// Hawking temperature, decay and photon budget.
    Budget,
    /// Regenerate one of the canned results.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
    },
    /// Parameter sweep described by a JSON spec file.
    Sweep { spec: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Fig2,
    Fig3,
    Budget,
    Trapping,
}

enum Failure {
    Config(ConfigError),
    Check(String),
    Runtime(Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(c) => Failure::Config(c),
            other => Failure::Runtime(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type Outcome = Result<(), Failure>;

struct Context {
    config: RunConfig,
    out: PathBuf,
    emit: Vec<Emit>,
    workers: usize,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self, Failure> {
        let config = match &cli.config {
            Some(p) => load_config(p)?,
            None => RunConfig::defaults(),
        };
        let out = cli
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .or_else(|| config.output.directory.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        let emit = cli.emit.clone().unwrap_or_else(|| config.output.emit.clone());
        let workers = cli
            .workers
            .or(config.output.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if workers == 0 {
            return Err(ConfigError::Invalid { path: "workers".into(), message: "must be at least 1".into() }.into());
        }
        Ok(Context { config, out, emit, workers })
    }

    fn scenario(&self) -> Result<Scenario, Failure> {
        Ok(self.config.build()?)
    }

    fn wants(&self, kind: Emit) -> bool {
        self.emit.contains(&kind)
    }

    fn file(&self, name: &str) -> Result<BufWriter<File>, Failure> {
        fs::create_dir_all(&self.out)?;
        let path = self.out.join(name);
        println!("wrote {}", path.display());
        Ok(BufWriter::new(File::create(path)?))
    }

    fn csv<F>(&self, name: &str, write: F) -> Outcome
    where
        F: FnOnce(BufWriter<File>) -> squid_horizon::Result<()>,
    {
        if self.wants(Emit::Csv) {
            write(self.file(name)?)?;
        }
        Ok(())
    }

    fn svg(&self, name: &str, plot: impl FnOnce() -> LinePlot) -> Outcome {
        if self.wants(Emit::Svg) {
            fs::create_dir_all(&self.out)?;
            let path = self.out.join(name);
            fs::write(&path, plot().to_svg())?;
            println!("wrote {}", path.display());
        }
        Ok(())
    }
}

fn validate(ctx: &Context) -> Outcome {
    let s = ctx.scenario()?;
    let report = validity_report(&s.array, &s.squid, &s.pulse, s.max_signal_frequency);
    print!("{report}");
    fs::create_dir_all(&ctx.out)?;
    let path = ctx.out.join("validity.json");
    fs::write(&path, serde_json::to_string_pretty(&report).expect("report serializes"))?;
    println!("wrote {}", path.display());
    if report.all_pass() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(Failure::Check(format!("validity checks failed: {}", names.join(", "))))
    }
}

fn profile(ctx: &Context) -> Outcome {
    let s = ctx.scenario()?;
    let p = velocity_profile_window(&s.array, &s.squid, &s.pulse, 0.0, 256)?;
    let horizons = find_horizons(&p);
    println!("pulse velocity      {:.6e} m/s", p.u);
    println!("front steepness     {:.6e} 1/m", s.pulse.steepness);
    println!("broadening rate     {:.6e} 1/m", s.pulse.broadening_rate);
    if horizons.is_empty() {
        println!("no horizon");
    }
    for h in &horizons {
        println!(
            "{:?} horizon at xi = {:.6e} m: |dc/dx| = {:.6e} 1/s, T_H = {:.4} mK, P = {:.4e} W",
            h.kind,
            h.position,
            h.velocity_gradient,
            h.temperature * 1e3,
            h.power
        );
    }
    let spectrum = front_spectrum(&s.pulse, s.array.cell_length, 0.0);
    if spectrum.flagged {
        println!(
            "warning: {:.2e} of the front's gradient power lies above ka = 0.5",
            spectrum.power_above_limit
        );
    }
    let flux: Vec<f64> = p.x.iter().map(|&x| s.pulse.comoving_flux(x, 0.0).as_quanta()).collect();
    ctx.csv("profile.csv", |w| {
        let rows: Vec<Vec<f64>> = (0..p.len()).map(|i| vec![p.x[i], flux[i], p.c[i]]).collect();
        io::write_table(w, &["xi_m", "flux_quanta", "c_m_s"], &rows)
    })?;
    ctx.svg("profile.svg", || {
        let pts = p.x.iter().zip(&p.c).map(|(x, c)| (x * 1e6, *c)).collect();
        LinePlot::new("Comoving velocity profile", "xi (um)", "c (m/s)")
            .series(Series::new("c(xi)", pts))
            .marker(io::Marker::Horizontal { y: p.u, label: "u".into() })
    })
}

fn simulate(ctx: &Context) -> Outcome {
    let s = ctx.scenario()?;
    let initial = match &s.packet {
        Some(spec) => LatticeState::packet(&s.model, spec)?,
        None => LatticeState::zeros(s.array.n_cells),
    };
    let traj = run(&initial, &s.model, &s.solver, s.drive, &s.probes)?;
    let last = traj.records.last().expect("run records the initial state");
    println!("steps               {}", s.solver.n_steps);
    println!("records             {}", traj.records.len());
    println!("final time          {:.6e} s", last.t);
    println!("energy drift        {:.3e}", traj.energy_drift());
    ctx.csv("trajectory.csv", |w| io::write_trajectory_csv(w, &traj))?;
    ctx.csv("energy.csv", |w| io::write_energy_csv(w, &traj))?;
    if !traj.probes.is_empty() {
        ctx.csv("probes.csv", |w| io::write_probe_csv(w, &traj))?;
    }
    if ctx.wants(Emit::Bin) {
        io::write_binary(ctx.file("trajectory.bin")?, &traj)?;
    }
    ctx.svg("snapshot.svg", || {
        let pts = last.a.iter().enumerate().map(|(n, a)| (n as f64, *a)).collect();
        LinePlot::new("Node potentials at the final record", "node", "A (V)").series(Series::new("A_n", pts))
    })
}

fn dispersion_plot(curve: &DispersionCurve) -> LinePlot {
    let analytic = DispersionCurve::analytic(curve.inductance, curve.capacitance, curve.cell_length, 101)
        .expect("analytic curve");
    let a = curve.cell_length;
    let line = analytic.points.iter().map(|p| (p.k * a, p.omega_analytic)).collect();
    let measured = curve.points.iter().filter_map(|p| p.omega_measured.map(|w| (p.k * a, w))).collect();
    LinePlot::new("Dispersion relation", "k a", "omega (rad/s)")
        .series(Series::new("analytic", line))
        .series(Series::new("measured", measured).dashed())
}

fn dispersion(ctx: &Context) -> Outcome {
    let s = ctx.scenario()?;
    let pool = rayon_pool(ctx.workers)?;
    let curve = pool.install(|| measure_dispersion(&s.array, &s.squid, s.dispersion_flux, &s.dispersion_frequencies))?;
    println!("{:>14} {:>16} {:>16} {:>11}", "k a", "omega_analytic", "omega_measured", "rel_error");
    for p in &curve.points {
        println!(
            "{:>14.6} {:>16.6e} {:>16.6e} {:>11.3e}",
            p.k * curve.cell_length,
            p.omega_analytic,
            p.omega_measured.unwrap_or(f64::NAN),
            p.rel_error().unwrap_or(f64::NAN)
        );
    }
    ctx.csv("dispersion.csv", |w| io::write_dispersion_csv(w, &curve))?;
    ctx.svg("dispersion.svg", || dispersion_plot(&curve))
}

fn rayon_pool(workers: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::Runtime(Error::InvalidParameter(e.to_string())))
}

fn budget(ctx: &Context, strict: bool) -> Outcome {
    let s = ctx.scenario()?;
    let b = temperature_budget(&s.array, &s.squid, &s.pulse, s.budget_cells)?;
    println!("T_H(0)              {:.4} mK", b.initial_temperature * 1e3);
    println!("T_H(1000 a)/T_H(0)  {:.4}", b.decay_ratio);
    println!("photons per pulse   {:.4}", b.photons);
    for c in &b.claims {
        println!("{:<24} expected {:<14} computed {:<12.5} {}", c.name, c.expected, c.computed, pass(c.pass));
    }
    ctx.csv("budget.csv", |w| io::write_horizon_csv(w, &b.trace))?;
    ctx.svg("budget.svg", || b.plot())?;
    if strict && !b.all_pass() {
        return Err(Failure::Check("budget differs from the published estimates".into()));
    }
    Ok(())
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn reproduce(ctx: &Context, target: Target) -> Outcome {
    match target {
        Target::Fig2 => {
            let s = ctx.scenario()?;
            let f = reproduce_fig2(&s.array, &s.squid, &s.pulse)?;
            println!("u/c(0)              {:.4}", f.u_ratio);
            println!("plateau c/c(0)      {:.4}", f.plateau_ratio);
            println!("horizons            {}", f.horizons.len());
            if let Some(phi) = f.horizon_flux {
                println!("flux at horizon     {phi:.5} flux quanta");
            }
            ctx.csv("fig2.csv", |w| f.write_csv(w))?;
            ctx.svg("fig2.svg", || f.plot())?;
            if f.horizons.len() != 1 {
                return Err(Failure::Check(format!("expected one horizon, found {}", f.horizons.len())));
            }
            Ok(())
        }
        Target::Fig3 => {
            let f = reproduce_fig3()?;
            for (c, z) in f.capacitances.iter().zip(f.intercepts()) {
                println!("C0 = {c:>8.1e} F   Z_A(0)/R_Q = {z:.4}");
            }
            ctx.csv("fig3.csv", |w| f.write_csv(w))?;
            ctx.svg("fig3.svg", || f.plot())
        }
        Target::Budget => budget(ctx, true),
        Target::Trapping => {
            let s = ctx.scenario()?;
            let scenario = TrappingScenario { array: s.array, squid: s.squid, pulse: s.pulse, ..TrappingScenario::reference()? };
            let r = wavepacket_trapping(&scenario)?;
            println!("traversal time      {:.4e} s", r.traversal_time);
            println!("window              {:.4e} s", r.window);
            for t in [&r.ahead, &r.behind] {
                let verdict = if t.crossed { "crossed" } else { "trapped" };
                println!("{:<8} packet ({:?}): {verdict}", t.label, t.direction);
            }
            ctx.csv("trapping.csv", |w| r.write_csv(w))?;
            ctx.svg("trapping.svg", || r.plot())?;
            if r.ahead.crossed && r.behind.trapped() {
                Ok(())
            } else {
                Err(Failure::Check("horizon did not separate the two packets".into()))
            }
        }
    }
}

fn sweep(ctx: &Context, spec_path: &Path) -> Outcome {
    let text = fs::read_to_string(spec_path).map_err(|e| ConfigError::Io {
        path: spec_path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut spec = SweepSpec::parse(&text)?;
    if spec.base.is_none() {
        spec.base = Some(ctx.config.clone());
    }
    let table = run_sweep(&spec, ctx.workers)?;
    let failed = table.rows.iter().filter(|r| !r.errors.is_empty()).count();
    println!("points              {}", table.rows.len());
    println!("points with errors  {failed}");
    ctx.csv("sweep.csv", |w| table.write_csv(w))?;
    if table.axes.len() == 1 {
        ctx.svg("sweep.svg", || {
            let mut plot = LinePlot::new("Sweep", table.axes[0].clone(), "value");
            for (j, o) in table.outputs.iter().enumerate() {
                let pts = table.rows.iter().filter_map(|r| r.values[j].map(|v| (r.coords[0], v))).collect();
                plot = plot.series(Series::new(o.column(), pts));
            }
            plot
        })?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Outcome {
    let ctx = Context::new(cli)?;
    match &cli.command {
        Command::Validate => validate(&ctx),
        Command::Profile => profile(&ctx),
        Command::Simulate => simulate(&ctx),
        Command::Dispersion => dispersion(&ctx),
        Command::Budget => budget(&ctx, false),
        Command::Reproduce { target } => reproduce(&ctx, *target),
        Command::Sweep { spec } => sweep(&ctx, spec),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
