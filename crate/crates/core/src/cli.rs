//! The `bnqn` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags or values that
//! violate a precondition), 2 on runtime failures.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basins::{export_csv, export_ppm, point_seed, render_basin, GridSpec};
use crate::complexpoly::{Polynomial, RelaxationDisk};
use crate::error::{Error, Result};
use crate::fmt_num;
use crate::invariance::{check_invariance, ConjugationSpec};
use crate::linalg::Matrix;
use crate::objective::{LimitClass, PolyModulusObjective};
use crate::solvers::{random_deltas, run, Method, SolverConfig};

#[derive(Debug, Parser)]
#[command(
    name = "bnqn",
    version,
    about = "Root finding for complex polynomials with Backtracking New Q-Newton's method"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one method from a single initial point
    Solve {
        #[command(flatten)]
        poly: PolyArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Bnqn)]
        method: MethodArg,
        /// Initial point `x,y`
        #[arg(long, allow_hyphen_values = true, default_value = "0.3,-1.7")]
        z0: String,
        /// Relaxation radius for rrn1d
        #[arg(long, default_value_t = 0.7)]
        rho: f64,
        /// Write the iteration trace as CSV
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Classify every point of a grid and export the basin map
    Basin {
        #[command(flatten)]
        poly: PolyArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Bnqn)]
        method: MethodArg,
        /// Window `x_min,x_max,y_min,y_max`
        #[arg(long, allow_hyphen_values = true, default_value = "-2,2,-2,2")]
        window: String,
        /// Resolution `nx,ny`
        #[arg(long, default_value = "400,400")]
        res: String,
        #[arg(long, default_value_t = 0.7)]
        rho: f64,
        /// Binary PPM output
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV output
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare a run on F with the run on F(cR .) from the mapped initial point
    Invariance {
        #[command(flatten)]
        poly: PolyArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Scale c > 0
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        /// Rotation angle of R in radians
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        rotation: f64,
        /// Compose R with the reflection (x, y) -> (x, -y)
        #[arg(long)]
        reflect: bool,
        #[arg(long, allow_hyphen_values = true, default_value = "0.4,1.1")]
        z0: String,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Random Relaxed Newton experiment from random initial points in [-3,3]^2
    Rrn {
        #[command(flatten)]
        poly: PolyArgs,
        /// Relaxation radius, 0.5 < rho < 1
        #[arg(long, default_value_t = 0.7)]
        rho: f64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 2000)]
        max_iter: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct PolyArgs {
    /// Coefficients as comma-separated `re+imi`, lowest degree first
    #[arg(long, allow_hyphen_values = true, default_value = "-1,0,1")]
    poly: String,
    /// Read --poly highest degree first
    #[arg(long)]
    highest_first: bool,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Hessian shifts, one more than the dimension, pairwise distinct
    #[arg(long, allow_hyphen_values = true, default_value = "0,1,-1")]
    deltas: String,
    /// Draw the shifts at random from [-1, 1] using --seed instead of --deltas
    #[arg(long)]
    random_deltas: bool,
    /// Exponent on the gradient norm in the shift
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Direction normalization w / max(1, theta |w|)
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Initial step size of the line search, in (0, 1]
    #[arg(long, default_value_t = 1.0)]
    gamma0: f64,
    /// Stop when the gradient norm falls to this
    #[arg(long, default_value = "1e-10")]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Distance for attributing a limit to a root or critical point
    #[arg(long, default_value = "1e-3")]
    classify_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Bnqn,
    Nqn,
    Newton,
    Btgd,
    Newton1d,
    Rrn1d,
}

/// Failures split by exit code.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::Parse(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Entry point for the binary; `argv[0]` is the program name.
pub fn run_command<S: AsRef<str>>(argv: &[S], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv.iter().map(|s| s.as_ref())) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::Runtime(e.to_string())
}

fn dispatch(command: Command, out: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Solve {
            poly,
            solver,
            method,
            z0,
            rho,
            trace,
        } => {
            let g = poly.parse()?;
            let cfg = solver.config()?;
            let method = to_method(method, rho)?;
            let z0 = parse_list(&z0, 2, "--z0")?;
            let obj = PolyModulusObjective::new(g)?;
            let t = run(&obj, &z0, method, &cfg);
            if let Some(path) = &trace {
                t.export_csv(path)?;
            }
            let last = t.last();
            writeln!(out, "method={}", method.name()).map_err(io_failure)?;
            writeln!(out, "terminal_point={},{}", fmt_num(last[0]), fmt_num(last[1])).map_err(io_failure)?;
            writeln!(out, "class={}", t.terminal).map_err(io_failure)?;
            if let LimitClass::Root(i) = t.terminal {
                let r = obj.roots()[i];
                writeln!(out, "root={},{}", fmt_num(r.re), fmt_num(r.im)).map_err(io_failure)?;
            }
            writeln!(out, "converged={}", t.converged).map_err(io_failure)?;
            writeln!(out, "iterations={}", t.iterations()).map_err(io_failure)?;
            writeln!(out, "grad_norm={}", fmt_num(t.final_grad_norm)).map_err(io_failure)?;
            if let Some(e) = t.error {
                return Err(Failure::Runtime(e));
            }
            Ok(())
        }
        Command::Basin {
            poly,
            solver,
            method,
            window,
            res,
            rho,
            out: ppm,
            csv,
        } => {
            let g = poly.parse()?;
            let cfg = solver.config()?;
            let method = to_method(method, rho)?;
            let w = parse_list(&window, 4, "--window")?;
            let r = parse_list(&res, 2, "--res")?;
            if r.iter().any(|v| *v < 1.0 || v.fract() != 0.0) {
                return Err(Failure::Usage(format!("--res needs positive integers, got {res}")));
            }
            let grid = GridSpec::new(w[0], w[1], w[2], w[3], r[0] as usize, r[1] as usize)?;
            let map = render_basin(&g, &grid, method, &cfg)?;
            if let Some(path) = &ppm {
                export_ppm(&map, path)?;
            }
            if let Some(path) = &csv {
                export_csv(&map, path)?;
            }
            writeln!(out, "points={}", grid.len()).map_err(io_failure)?;
            for (i, root) in map.roots.iter().enumerate() {
                let n = map.count(|c| *c == LimitClass::Root(i));
                writeln!(out, "root_{i}={},{} count={n}", fmt_num(root.re), fmt_num(root.im)).map_err(io_failure)?;
            }
            let crit = map.count(|c| matches!(c, LimitClass::CriticalNonRoot(_)));
            writeln!(out, "critical={crit}").map_err(io_failure)?;
            writeln!(out, "diverged={}", map.count(|c| *c == LimitClass::Diverged)).map_err(io_failure)?;
            writeln!(out, "undecided={}", map.count(|c| *c == LimitClass::Undecided)).map_err(io_failure)?;
            Ok(())
        }
        Command::Invariance {
            poly,
            solver,
            c,
            rotation,
            reflect,
            z0,
            steps,
        } => {
            let g = poly.parse()?;
            let cfg = solver.config()?;
            let z0 = parse_list(&z0, 2, "--z0")?;
            let mut r = Matrix::rotation2(rotation);
            if reflect {
                r = r.mul(&Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]));
            }
            let spec = ConjugationSpec::new(c, r)?;
            let obj = PolyModulusObjective::new(g)?;
            let dev = check_invariance(&obj, &spec, &z0, &cfg, steps)?;
            writeln!(out, "c={}", fmt_num(c)).map_err(io_failure)?;
            writeln!(out, "rotation={}", fmt_num(rotation)).map_err(io_failure)?;
            writeln!(out, "reflect={reflect}").map_err(io_failure)?;
            writeln!(out, "steps={steps}").map_err(io_failure)?;
            writeln!(out, "max_deviation={}", fmt_num(dev)).map_err(io_failure)?;
            Ok(())
        }
        Command::Rrn {
            poly,
            rho,
            trials,
            max_iter,
            seed,
        } => {
            let g = poly.parse()?;
            let report = run_rrn_experiment(&g, rho, trials, max_iter, seed)?;
            write!(out, "{}", report.to_key_values()).map_err(io_failure)?;
            Ok(())
        }
    }
}

impl PolyArgs {
    fn parse(&self) -> Result<Polynomial> {
        let p = if self.highest_first {
            Polynomial::parse_highest_first(&self.poly)?
        } else {
            Polynomial::parse(&self.poly)?
        };
        if p.degree() < 1 {
            return Err(Error::InvalidConfig("--poly must have degree >= 1".into()));
        }
        Ok(p)
    }
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        let deltas = if self.random_deltas {
            random_deltas(2, self.seed)
        } else {
            parse_list(&self.deltas, 3, "--deltas")
                .map_err(|_| Error::InvalidConfig(format!("--deltas needs three numbers, got {:?}", self.deltas)))?
        };
        let cfg = SolverConfig {
            deltas,
            tau: self.tau,
            theta: self.theta,
            gamma0: self.gamma0,
            grad_tol: self.tol,
            max_iter: self.max_iter,
            classify_tol: self.classify_tol,
            seed: Some(self.seed),
        };
        cfg.validate(2)?;
        Ok(cfg)
    }
}

fn to_method(m: MethodArg, rho: f64) -> Result<Method> {
    Ok(match m {
        MethodArg::Bnqn => Method::BnqnNewVariant,
        MethodArg::Nqn => Method::Nqn,
        MethodArg::Newton => Method::NewtonOpt,
        MethodArg::Btgd => Method::BacktrackingGd,
        MethodArg::Newton1d => Method::Newton1D,
        MethodArg::Rrn1d => Method::RandomRelaxedNewton1D(RelaxationDisk::new(rho)?),
    })
}

fn parse_list(text: &str, len: usize, flag: &str) -> std::result::Result<Vec<f64>, Failure> {
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Failure::Usage(format!("{flag}: cannot parse {text:?}")))?;
    if values.len() != len || values.iter().any(|v| !v.is_finite()) {
        return Err(Failure::Usage(format!(
            "{flag} needs {len} finite numbers, got {text:?}"
        )));
    }
    Ok(values)
}

/// Outcome of the Random Relaxed Newton experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RrnReport {
    pub trials: usize,
    pub converged_fraction: f64,
    /// Converged trials per root, indexed like the sorted root list.
    pub per_root_counts: Vec<usize>,
}

impl RrnReport {
    pub fn to_key_values(&self) -> String {
        let mut s = format!(
            "trials={}\nconverged_fraction={}\n",
            self.trials,
            fmt_num(self.converged_fraction)
        );
        for (i, n) in self.per_root_counts.iter().enumerate() {
            s.push_str(&format!("root_{i}={n}\n"));
        }
        s
    }
}

/// Random Relaxed Newton from `trials` initial points uniform in `[-3, 3]^2`,
/// with a fresh `alpha` drawn from the relaxation disk at every step.
pub fn run_rrn_experiment(p: &Polynomial, rho: f64, trials: usize, max_iter: usize, seed: u64) -> Result<RrnReport> {
    let disk = RelaxationDisk::new(rho)?;
    if trials == 0 || max_iter == 0 {
        return Err(Error::InvalidConfig("trials and max_iter must be positive".into()));
    }
    let obj = PolyModulusObjective::new(p.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<[f64; 2]> = (0..trials)
        .map(|_| [rng.gen_range(-3.0..=3.0), rng.gen_range(-3.0..=3.0)])
        .collect();
    let base = SolverConfig {
        max_iter,
        ..SolverConfig::default_for(2)
    };
    let classes: Vec<LimitClass> = crate::worker_pool().install(|| {
        starts
            .par_iter()
            .enumerate()
            .map(|(k, z0)| {
                let cfg = SolverConfig {
                    seed: Some(point_seed(seed, k)),
                    ..base.clone()
                };
                run(&obj, z0, Method::RandomRelaxedNewton1D(disk), &cfg).terminal
            })
            .collect()
    });
    let mut per_root_counts = vec![0; obj.roots().len()];
    for c in &classes {
        if let LimitClass::Root(i) = c {
            per_root_counts[*i] += 1;
        }
    }
    let converged = per_root_counts.iter().sum::<usize>();
    Ok(RrnReport {
        trials,
        converged_fraction: converged as f64 / trials as f64,
        per_root_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut argv = vec!["bnqn"];
        argv.extend_from_slice(args);
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_command(&argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn help_lists_defaults() {
        let (code, out, _) = call(&["solve", "--help"]);
        assert_eq!(code, 0);
        for needle in ["0,1,-1", "--tau", "--theta", "--gamma0", "[default: 1]", "[default: 0]"] {
            assert!(out.contains(needle), "missing {needle} in help:\n{out}");
        }
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(call(&["solve", "--bogus"]).0, 1);
        assert_eq!(call(&["solve", "--z0", "1"]).0, 1);
        assert_eq!(call(&["solve", "--deltas", "0,1,1"]).0, 1);
        assert_eq!(call(&["solve", "--poly", "3"]).0, 1);
        assert_eq!(call(&["rrn", "--rho", "1.0"]).0, 1);
        assert_eq!(call(&["rrn", "--rho", "0.4"]).0, 1);
    }

    #[test]
    fn solve_reports_root() {
        let (code, out, _) = call(&["solve", "--poly", "-1,0,1", "--method", "bnqn", "--z0", "0.3,-1.7"]);
        assert_eq!(code, 0);
        assert!(out.contains("class=Root(1)"), "{out}");
        assert!(out.contains("terminal_point=1.0000000000"), "{out}");
    }

    #[test]
    fn rrn_quadratic() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        let r = run_rrn_experiment(&p, 0.7, 500, 2000, 7).unwrap();
        assert!(r.converged_fraction >= 0.99, "{r:?}");
        assert_eq!(r, run_rrn_experiment(&p, 0.7, 500, 2000, 7).unwrap());
    }
}
