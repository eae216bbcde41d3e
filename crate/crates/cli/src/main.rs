//! `pcf`: spectra, densities of states, Green functions and degree growth on
//! self-similar lattices.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use pcf_core::dynamics::degree::{bidegree_sequence, dichotomy_classify, dynamical_degree};
use pcf_core::dynamics::gasket::{
    compare_with_limit, decimation_check, gasket_limit_measure, gasket_maps, phat_preimage_tree,
};
use pcf_core::dynamics::interval::interval_maps;
use pcf_core::dynamics::rational1d::{compose_reduce_1d, DEFAULT_BIT_LIMIT};
use pcf_core::error::Error;
use pcf_core::exec::Exec;
use pcf_core::measure::{AtomicMeasure, DEFAULT_MERGE_TOL};
use pcf_core::operator::{assemble, BaseOperator, LevelOperator};
use pcf_core::renorm::{RenormContext, DEFAULT_GREEN_ITERATIONS};
use pcf_core::spectral::{
    counting_measure, nd_spectrum_with, spectrum_with, stacked_nullity, BoundaryCondition, NdOptions, SpectrumOptions,
    DEFAULT_CEILING, DEFAULT_ND_TOL,
};
use pcf_core::structure::{validate_structure, Structure, StructureSpec};
use pcf_core::weight::Weight;

const EXIT_CONFIG: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_CEILING: u8 = 3;

/// Bidegrees of the gasket map are only tabulated up to this level.
const MAX_BIDEGREE_LEVEL: usize = 4;

#[derive(Parser, Debug)]
#[command(
    name = "pcf",
    version,
    about = "Spectra and renormalization on finitely ramified self-similar lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Builtin structure: `gasket` or `interval:<alpha>`.
    #[arg(long, default_value = "gasket", conflicts_with = "structure")]
    builtin: String,
    /// Structure description (JSON).
    #[arg(long)]
    structure: Option<PathBuf>,
    /// Base operator (JSON). Defaults to the standard one for builtins.
    #[arg(long)]
    operator: Option<PathBuf>,
    /// Directory for output files; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest dense problem allowed.
    #[arg(long, default_value_t = DEFAULT_CEILING)]
    ceiling: usize,
    /// Run without the thread pool.
    #[arg(long)]
    sequential: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Bc {
    Neumann,
    Dirichlet,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Check the structure axioms.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Neumann or Dirichlet spectrum as `lambda,multiplicity`.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "neumann")]
        bc: Bc,
        /// Also write `A_<n>` in MatrixMarket form (needs --out).
        #[arg(long)]
        matrix_market: bool,
    },
    /// Neumann-Dirichlet spectrum and the vanishing orders `rho_n`.
    Nd {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_ND_TOL)]
        tol: f64,
    },
    /// CDF of the normalized Neumann counting measure on a grid.
    Dos {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        to: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Green function on a rectangular grid of complex lambda.
    Green {
        #[command(flatten)]
        common: Common,
        #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [-6.0, 1.0])]
        re: Vec<f64>,
        #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [0.1, 2.0])]
        im: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_GREEN_ITERATIONS)]
        n_max: usize,
    },
    /// Truncated limit measure of the gasket against the level-n N-D measure.
    GasketMeasure {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Degree tables and the dichotomy verdict.
    Degrees {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// Spectral decimation containment on the gasket.
    Decimation {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Spectrum { .. } => "spectrum",
            Command::Nd { .. } => "nd",
            Command::Dos { .. } => "dos",
            Command::Green { .. } => "green",
            Command::GasketMeasure { .. } => "gasket-measure",
            Command::Degrees { .. } => "degrees",
            Command::Decimation { .. } => "decimation",
        }
    }

    fn common_mut(&mut self) -> &mut Common {
        match self {
            Command::Validate { common }
            | Command::Spectrum { common, .. }
            | Command::Nd { common, .. }
            | Command::Dos { common, .. }
            | Command::Green { common, .. }
            | Command::GasketMeasure { common, .. }
            | Command::Degrees { common, .. }
            | Command::Decimation { common, .. } => common,
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Validate { common }
            | Command::Spectrum { common, .. }
            | Command::Nd { common, .. }
            | Command::Dos { common, .. }
            | Command::Green { common, .. }
            | Command::GasketMeasure { common, .. }
            | Command::Degrees { common, .. }
            | Command::Decimation { common, .. } => common,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Validation(String),
    Ceiling(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Validation(_) => Failure::Validation(e.to_string()),
            Error::CeilingExceeded { .. } | Error::BitLimit(_) => Failure::Ceiling(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Run<T = ()> = Result<T, Failure>;

/// 17 significant digits.
fn f17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

struct Setup {
    spec: StructureSpec,
    base: Option<BaseOperator>,
    exec: Exec,
    hash: String,
}

impl Setup {
    fn structure(&self) -> Run<Structure> {
        Ok(Structure::new(self.spec.clone())?)
    }

    fn base(&self) -> Run<&BaseOperator> {
        self.base
            .as_ref()
            .ok_or_else(|| Failure::Config("no base operator: pass --operator".into()))
    }

    fn level(&self, s: &Structure, n: usize, ceiling: usize) -> Run<LevelOperator> {
        let lat = s.build_level(n);
        if lat.num_vertices() > ceiling {
            return Err(Failure::Ceiling(format!(
                "level {n} has {} vertices, ceiling is {ceiling}",
                lat.num_vertices()
            )));
        }
        Ok(assemble(self.base()?, s, &lat)?)
    }
}

fn default_operator(spec: &StructureSpec) -> Option<BaseOperator> {
    if spec.name == "gasket" {
        Some(BaseOperator::gasket())
    } else if spec.name.starts_with("interval") {
        BaseOperator::interval(Weight::one(), Weight::one()).ok()
    } else {
        None
    }
}

fn setup(cmd: &Command) -> Run<Setup> {
    let c = cmd.common();
    let spec = match &c.structure {
        Some(p) => StructureSpec::from_file(p)?,
        None => StructureSpec::builtin(&c.builtin)?,
    };
    let base = match &c.operator {
        Some(p) => Some(BaseOperator::from_file(p)?),
        None => default_operator(&spec),
    };
    // where the output goes is not part of the configuration
    let mut key = cmd.clone();
    key.common_mut().out = None;
    let mut h = Sha256::new();
    h.update(format!("{key:?}"));
    h.update(serde_json::to_string(&spec).map_err(|e| Failure::Config(e.to_string()))?);
    if let Some(b) = &base {
        h.update(serde_json::to_string(&b.to_file_format()).map_err(|e| Failure::Config(e.to_string()))?);
    }
    let hash = h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    });
    let exec = if c.sequential { Exec::Sequential } else { Exec::Parallel };
    Ok(Setup { spec, base, exec, hash })
}

/// Collects named outputs; written to `--out` or concatenated on stdout.
struct Output {
    dir: Option<PathBuf>,
    header: String,
}

impl Output {
    fn emit(&self, file: &str, body: &str) -> Run {
        let text = format!("{}\n{body}", self.header);
        match &self.dir {
            Some(d) => {
                std::fs::create_dir_all(d)?;
                std::fs::write(d.join(file), text)?;
            }
            None => print!("{text}"),
        }
        Ok(())
    }

    fn emit_raw(&self, file: &str, body: &str) -> Run {
        match &self.dir {
            Some(d) => {
                std::fs::create_dir_all(d)?;
                std::fs::write(d.join(file), body)?;
            }
            None => print!("{body}"),
        }
        Ok(())
    }
}

fn measure_csv(m: &AtomicMeasure) -> String {
    let mut s = String::from("lambda,multiplicity\n");
    for &(l, w) in m.atoms() {
        let _ = writeln!(s, "{},{}", f17(l), f17(w));
    }
    s
}

fn run(cli: Cli) -> Run {
    let cmd = &cli.command;
    let st = setup(cmd)?;
    let c = cmd.common();
    let tols = match cmd {
        Command::Nd { tol, .. } => format!("nd_tol={tol:e} merge_tol={DEFAULT_MERGE_TOL:e}"),
        Command::GasketMeasure { tol, .. } | Command::Decimation { tol, .. } => {
            format!("nd_tol={DEFAULT_ND_TOL:e} merge_tol={DEFAULT_MERGE_TOL:e} loc_tol={tol:e}")
        }
        _ => format!("merge_tol={DEFAULT_MERGE_TOL:e}"),
    };
    let out = Output {
        dir: c.out.clone(),
        header: format!(
            "# pcf {} config_sha256={} {tols} ceiling={}",
            cmd.name(),
            st.hash,
            c.ceiling
        ),
    };
    let nd_opts = |tol: f64| NdOptions {
        tol,
        merge_tol: DEFAULT_MERGE_TOL,
        ceiling: c.ceiling,
        exec: st.exec,
    };

    match cmd {
        Command::Validate { .. } => {
            let rep = validate_structure(&st.spec)?;
            let passed = rep.checks.iter().filter(|a| a.passed).count();
            println!("{rep}");
            println!("{passed} of {} axioms passed", rep.checks.len());
            if !rep.passed() {
                return Err(Failure::Validation(format!(
                    "{} axiom(s) failed",
                    rep.checks.len() - passed
                )));
            }
        }
        Command::Spectrum {
            n, bc, matrix_market, ..
        } => {
            let s = st.structure()?;
            let op = st.level(&s, *n, c.ceiling)?;
            let b = match bc {
                Bc::Neumann => BoundaryCondition::Neumann,
                Bc::Dirichlet => BoundaryCondition::Dirichlet,
            };
            let eig = spectrum_with(
                &op,
                b,
                SpectrumOptions {
                    ceiling: c.ceiling,
                    vectors: false,
                },
            )?;
            out.emit("spectrum.csv", &measure_csv(&counting_measure(&eig)))?;
            if *matrix_market {
                if c.out.is_none() {
                    return Err(Failure::Config("--matrix-market needs --out".into()));
                }
                out.emit_raw(&format!("A_{n}.mtx"), &op.a.to_matrix_market())?;
                let mut bs = String::from("vertex,b\n");
                for (v, w) in op.b.iter().enumerate() {
                    let _ = writeln!(bs, "{},{}", v + 1, f17(*w));
                }
                out.emit(&format!("b_{n}.csv"), &bs)?;
            }
        }
        Command::Nd { n, tol, .. } => {
            let s = st.structure()?;
            let op = st.level(&s, *n, c.ceiling)?;
            let nd = nd_spectrum_with(&op, &nd_opts(*tol))?;
            out.emit("nd.csv", &measure_csv(&nd))?;
            let mut rho = String::from("lambda,rho_n\n");
            for &(l, _) in nd.atoms() {
                let _ = writeln!(rho, "{},{}", f17(l), stacked_nullity(&op, l, *tol));
            }
            match &c.out {
                Some(_) => out.emit("rho.csv", &rho)?,
                None => eprint!("{rho}"),
            }
        }
        Command::Dos { n, from, to, steps, .. } => {
            let s = st.structure()?;
            let op = st.level(&s, *n, c.ceiling)?;
            let eig = spectrum_with(
                &op,
                BoundaryCondition::Neumann,
                SpectrumOptions {
                    ceiling: c.ceiling,
                    vectors: false,
                },
            )?;
            let m = counting_measure(&eig).scale((s.n_cells() as f64).powi(-(*n as i32)));
            let lo = from.unwrap_or_else(|| {
                let min = eig.eigenvalues.iter().cloned().fold(0.0, f64::min);
                min - 0.01 * min.abs().max(1.0)
            });
            if *steps == 0 || !(lo < *to) {
                return Err(Failure::Config("need from < to and steps > 0".into()));
            }
            let mut body = String::from("lambda,cdf\n");
            for k in 0..=*steps {
                let l = lo + (to - lo) * k as f64 / *steps as f64;
                let _ = writeln!(body, "{},{}", f17(l), f17(m.cdf(l)));
            }
            out.emit("dos.csv", &body)?;
        }
        Command::Green {
            re, im, steps, n_max, ..
        } => {
            let s = st.structure()?;
            let ctx = RenormContext::new(&s);
            if *steps == 0 {
                return Err(Failure::Config("steps must be positive".into()));
            }
            let axis = |r: &[f64]| -> Vec<f64> {
                (0..=*steps)
                    .map(|k| r[0] + (r[1] - r[0]) * k as f64 / *steps as f64)
                    .collect()
            };
            let pts: Vec<Complex64> = axis(im)
                .iter()
                .flat_map(|&y| axis(re).into_iter().map(move |x| Complex64::new(x, y)))
                .collect();
            let res = ctx.green_scan(st.base()?, &pts, *n_max, st.exec);
            let mut body = String::from("re_lambda,im_lambda,value,iters,tail\n");
            for (z, r) in pts.iter().zip(res) {
                let g = r?;
                let _ = writeln!(
                    body,
                    "{},{},{},{},{}",
                    f17(z.re),
                    f17(z.im),
                    f17(g.value),
                    g.iterations,
                    f17(g.tail_bound)
                );
            }
            out.emit("green.csv", &body)?;
        }
        Command::GasketMeasure { n, kmax, tol, .. } => {
            require_gasket(&st)?;
            let s = st.structure()?;
            let op = st.level(&s, *n, c.ceiling)?;
            let nd = nd_spectrum_with(&op, &nd_opts(DEFAULT_ND_TOL))?.scale(3f64.powi(-(*n as i32)));
            let lim = gasket_limit_measure(*kmax);
            let cmp = compare_with_limit(&nd, &lim, *tol, 1e-12);
            let mut body = String::from("location,mass\n");
            for a in &lim.atoms {
                let _ = writeln!(
                    body,
                    "{},{}",
                    f17(a.location),
                    f17(pcf_core::weight::ratio_to_f64(&a.mass))
                );
            }
            out.emit("limit_measure.csv", &body)?;
            let trees: Vec<_> = [-1.5, -2.5]
                .iter()
                .map(|&t| phat_preimage_tree(t, *kmax).map(|nodes| serde_json::json!({ "root": t, "nodes": nodes })))
                .collect::<Result<_, _>>()?;
            if c.out.is_some() {
                let js = serde_json::to_string_pretty(&trees).map_err(|e| Failure::Config(e.to_string()))?;
                out.emit_raw("preimage_trees.json", &(js + "\n"))?;
            }
            eprintln!("level {n}: {} N-D atoms, limit truncated at k_max = {kmax}", nd.len());
            eprintln!("max atom-location mismatch: {}", f17(cmp.max_location_mismatch));
            eprintln!("unmatched atoms: {}", cmp.unmatched.len());
            eprintln!("atoms heavier than the limit: {}", cmp.mass_violations.len());
            eprintln!("total mass (N-D / 3^n): {}", f17(cmp.finite_total));
            eprintln!("total mass (limit, truncated): {}", f17(cmp.limit_total));
            eprintln!("truncation deficit: {}", lim.deficit);
            eprintln!("mass at -3 (N-D / 3^n): {}", f17(cmp.finite_mass_at_minus_three));
        }
        Command::Degrees { n, .. } => degrees(&st, *n, &out)?,
        Command::Decimation { n, tol, .. } => {
            require_gasket(&st)?;
            let s = st.structure()?;
            let r = decimation_check(&s, st.base()?, *n, *tol, c.ceiling)?;
            println!("levels {} -> {}", n + 1, n);
            println!(
                "checked {} eigenvalues, excluded {} at -3, -3/2, -5/2",
                r.checked, r.excluded
            );
            println!(
                "max distance of p(lambda) to the coarse spectrum: {}",
                f17(r.max_mismatch)
            );
            println!("contained: {}", r.failures.is_empty());
            for (l, img, d) in &r.failures {
                println!("  lambda {} -> {} off by {}", f17(*l), f17(*img), f17(*d));
            }
        }
    }
    Ok(())
}

fn require_gasket(st: &Setup) -> Run {
    if st.spec.name != "gasket" {
        return Err(Failure::Config("this command needs the builtin gasket".into()));
    }
    Ok(())
}

fn degrees(st: &Setup, n: usize, out: &Output) -> Run {
    if n == 0 {
        return Err(Failure::Config("n must be positive".into()));
    }
    let mut body = String::from("n,d00,d01,d10,d11,l_n,l_n^{1/n}\n");
    let (verdict_d, n_cells, note);
    if st.spec.name == "gasket" {
        let m = gasket_maps();
        let nb = n.min(MAX_BIDEGREE_LEVEL);
        let seq = bidegree_sequence(&m.g, nb, DEFAULT_BIT_LIMIT)?;
        let l: Vec<f64> = seq.iter().map(|d| d.spectral_radius()).collect();
        let est = dynamical_degree(&l)?;
        for (k, d) in seq.iter().enumerate() {
            let e = d.entries();
            let _ = writeln!(
                body,
                "{},{},{},{},{},{},{}",
                k + 1,
                e[0][0],
                e[0][1],
                e[1][0],
                e[1][1],
                f17(l[k]),
                f17(est.sequence[k])
            );
        }
        let (_, dh) = compose_reduce_1d(&m.g_hat, n, DEFAULT_BIT_LIMIT)?;
        let hat: Vec<f64> = dh.iter().map(|&d| d as f64).collect();
        let hat_est = dynamical_degree(&hat)?;
        let mut tab = String::from("n,d_hat_n,d_hat_n^{1/n}\n");
        for (k, d) in dh.iter().enumerate() {
            let _ = writeln!(tab, "{},{},{}", k + 1, d, f17(hat_est.sequence[k]));
        }
        out.emit("degrees_hat.csv", &tab)?;
        verdict_d = hat_est.estimate;
        n_cells = 3;
        note = format!(
            "d_inf from the one-variable map: {}; bidegree estimate at n = {nb}: {}\n\
             label note: the gasket is sometimes filed under the algebraically stable case; \
             d_inf < N places it in case_i (mu^ND = mu, compactly supported eigenfunctions)",
            f17(hat_est.estimate),
            f17(est.estimate)
        );
    } else if let Some(a) = st.spec.name.strip_prefix("interval") {
        let alpha = st.spec.alpha[0]
            .exact()
            .cloned()
            .ok_or_else(|| Failure::Config(format!("interval{a} needs a rational alpha")))?;
        let maps = interval_maps(&alpha)?;
        let d = maps.projective_degrees(n, DEFAULT_BIT_LIMIT)?;
        let l: Vec<f64> = d.iter().map(|&v| v as f64).collect();
        let est = dynamical_degree(&l)?;
        for (k, v) in d.iter().enumerate() {
            let _ = writeln!(body, "{},{},,,,{},{}", k + 1, v, f17(l[k]), f17(est.sequence[k]));
        }
        verdict_d = est.estimate;
        n_cells = 2;
        note = format!("d_inf from the map on P^2: {}", f17(est.estimate));
    } else {
        return Err(Failure::Config(
            "degree maps exist for the builtin gasket and interval only".into(),
        ));
    }
    out.emit("degrees.csv", &body)?;
    eprintln!("{note}");
    eprintln!("verdict: {} (N = {n_cells})", dichotomy_classify(verdict_d, n_cells));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Config(m) => (EXIT_CONFIG, m),
                Failure::Validation(m) => (EXIT_VALIDATION, m),
                Failure::Ceiling(m) => (EXIT_CEILING, m),
            };
            eprintln!("pcf: {msg}");
            ExitCode::from(code)
        }
    }
}
