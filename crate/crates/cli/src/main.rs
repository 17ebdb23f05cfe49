//! Command-line driver: sieve construction, character tables, zero
//! datasets, decomposition verification runs, moment grids, lemma-style
//! sum reports, and the lower-bound machinery, with plot-ready CSV (or
//! JSON) output.
//!
//! Output is byte-identical across runs of the same configuration: all
//! reductions are fixed-order and independent of the thread count.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigFile, GridSpec, SiegelSpec};
use gbap_core::arith::LambdaTable;
use gbap_core::chars::CharacterGroup;
use gbap_core::goldbach::{
    assemble_report, gallagher_check, omega_construction, omega_scan, GoldbachConfig,
};
use gbap_core::moments::{
    power_sum_identities, second_moment_h, second_moment_k, sum_psi_progression,
    weighted_beta_sum, SiegelShift,
};
use gbap_core::zeros::{
    save_zeros, zero_file_name, ExponentConfig, ModulusZeros, SiegelDatum,
    ZeroCache, ZeroFinderOptions,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Failure carrying the process exit code: 2 for configuration errors,
/// 3 for validation failures.
#[derive(Debug)]
pub struct CliFailure {
    code: u8,
    message: String,
}

impl CliFailure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<gbap_core::Error> for CliFailure {
    fn from(e: gbap_core::Error) -> Self {
        if e.is_validation() {
            Self::validation(e.to_string())
        } else {
            Self::config(e.to_string())
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "gbap",
    version,
    about = "Weighted Goldbach sums in arithmetic progressions: sieves, characters, L-function zeros, decomposition and moment verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonOpts {
    /// Flat key=value configuration file; explicit flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long)]
    q1: Option<u64>,
    #[arg(long)]
    q2: Option<u64>,
    #[arg(long)]
    a1: Option<u64>,
    #[arg(long)]
    a2: Option<u64>,

    /// Evaluation point X (or sieve/scan limit, depending on the
    /// subcommand).
    #[arg(long = "X")]
    x: Option<f64>,

    /// Geometric grid start:factor:count replacing --X.
    #[arg(long)]
    grid: Option<GridSpec>,

    /// Zero truncation height.
    #[arg(long = "T")]
    t: Option<f64>,

    /// Directory of zero dataset files (computed on the fly otherwise).
    #[arg(long)]
    zeros_file: Option<PathBuf>,

    /// B* exponent for both moduli.
    #[arg(long)]
    b_star: Option<f64>,
    /// B* override for modulus 1 only.
    #[arg(long)]
    b_star1: Option<f64>,
    /// B* override for modulus 2 only.
    #[arg(long)]
    b_star2: Option<f64>,

    /// Synthetic exceptional zero beta:label for both moduli (requires
    /// q1 = q2).
    #[arg(long)]
    siegel: Option<SiegelSpec>,
    /// Synthetic exceptional zero beta:label for modulus 1.
    #[arg(long)]
    siegel1: Option<SiegelSpec>,
    /// Synthetic exceptional zero beta:label for modulus 2.
    #[arg(long)]
    siegel2: Option<SiegelSpec>,

    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    /// csv (default) or json.
    #[arg(long)]
    format: Option<String>,

    /// Worker threads (library default when omitted).
    #[arg(long)]
    threads: Option<usize>,

    /// RNG seed recorded in the provenance line (fuzz harnesses).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the von Mangoldt table and dump it in binary form.
    Sieve {
        #[command(flatten)]
        common: CommonOpts,
        /// Sieve limit.
        #[arg(long = "N")]
        limit: Option<u64>,
    },
    /// Export the character table of one modulus as CSV.
    Chars {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        q: Option<u64>,
    },
    /// Compute (or validate) zero datasets for all characters of a
    /// modulus.
    Zeros {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        q: Option<u64>,
        /// Validate an existing dataset instead of computing.
        #[arg(long)]
        validate: bool,
    },
    /// Decomposition reports over an X grid.
    VerifyTheorem {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Second-moment grids (H by default, K when --h is given).
    Moments {
        #[command(flatten)]
        common: CommonOpts,
        /// Window width for the short-interval moment: a number, or
        /// "sqrt" for h = sqrt(x).
        #[arg(long)]
        h: Option<String>,
    },
    /// Lemma-style sum reports: sumphi, beta, or powers.
    Sums {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        lemma: Option<String>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        beta1: Option<f64>,
        #[arg(long)]
        beta2: Option<f64>,
    },
    /// Primorial CRT construction plus the growth scan.
    Omega {
        #[command(flatten)]
        common: CommonOpts,
        /// Prime cutoff for the primorial modulus.
        #[arg(long)]
        y: Option<u64>,
        /// Excluded prime (experimentation hook; no-op by default).
        #[arg(long)]
        p1: Option<u64>,
    },
    /// Dyadic character-sum smallness check.
    Gallagher {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        q: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Resolved options common to the analysis subcommands.
struct Resolved {
    q1: u64,
    q2: u64,
    a1: u64,
    a2: u64,
    xs: Vec<f64>,
    t: f64,
    zeros_dir: Option<PathBuf>,
    exponents: ExponentConfig,
    b1: f64,
    b2: f64,
    siegel1: Option<SiegelSpec>,
    siegel2: Option<SiegelSpec>,
    out: Option<PathBuf>,
    json: bool,
    seed: u64,
}

fn resolve_common(common: &CommonOpts, need_x: bool) -> Result<Resolved, CliFailure> {
    let file = match &common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let q1 = file.resolve(&common.q1, "q1")?.unwrap_or(1);
    let q2 = file.resolve(&common.q2, "q2")?.unwrap_or(1);
    let a1 = file.resolve(&common.a1, "a1")?.unwrap_or(0);
    let a2 = file.resolve(&common.a2, "a2")?.unwrap_or(0);
    let x = file.resolve(&common.x, "X")?;
    let grid = file.resolve(&common.grid, "grid")?;
    let t = file.resolve(&common.t, "T")?.unwrap_or(100.0);
    let zeros_dir = file.resolve(&common.zeros_file, "zeros-file")?;
    let b_star = file.resolve(&common.b_star, "b-star")?;
    let b1 = file
        .resolve(&common.b_star1, "b-star1")?
        .or(b_star)
        .unwrap_or(0.5);
    let b2 = file
        .resolve(&common.b_star2, "b-star2")?
        .or(b_star)
        .unwrap_or(0.5);
    let siegel = file.resolve(&common.siegel, "siegel")?;
    let mut siegel1 = file.resolve(&common.siegel1, "siegel1")?;
    let mut siegel2 = file.resolve(&common.siegel2, "siegel2")?;
    if let Some(s) = siegel {
        if q1 != q2 {
            return Err(CliFailure::config(
                "--siegel requires q1 = q2; use --siegel1 / --siegel2 for distinct moduli",
            ));
        }
        siegel1 = siegel1.or(Some(s));
        siegel2 = siegel2.or(Some(s));
    }
    let out = file.resolve(&common.out, "out")?;
    let format = file
        .resolve(&common.format, "format")?
        .unwrap_or_else(|| "csv".to_string());
    let json = match format.as_str() {
        "csv" => false,
        "json" => true,
        other => {
            return Err(CliFailure::config(format!(
                "unknown format {:?} (expected csv or json)",
                other
            )))
        }
    };
    let seed = file.resolve(&common.seed, "seed")?.unwrap_or(0);
    if let Some(n) = file.resolve(&common.threads, "threads")? {
        // Ignore the error if a pool already exists (tests, repeat calls).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }

    let xs = match (grid, x) {
        (Some(g), _) => g.points(),
        (None, Some(x)) => vec![x],
        (None, None) if need_x => {
            return Err(CliFailure::config("either --X or --grid is required"))
        }
        _ => Vec::new(),
    };

    let mut exponents = ExponentConfig::default();
    exponents.set(q1, b1).map_err(CliFailure::from)?;
    exponents.set(q2, b2).map_err(CliFailure::from)?;

    Ok(Resolved {
        q1,
        q2,
        a1,
        a2,
        xs,
        t,
        zeros_dir,
        exponents,
        b1,
        b2,
        siegel1,
        siegel2,
        out,
        json,
        seed,
    })
}

impl Resolved {
    fn provenance(&self) -> String {
        let source = match &self.zeros_dir {
            Some(p) => format!("file:{}", p.display()),
            None => "computed".to_string(),
        };
        format!(
            "# gbap {} provenance: T={} b_star1={} b_star2={} zeros={} seed={}",
            VERSION, self.t, self.b1, self.b2, source, self.seed
        )
    }

    fn zero_source_string(&self) -> String {
        match &self.zeros_dir {
            Some(p) => format!("file:{}", p.display()),
            None => "computed".to_string(),
        }
    }

    /// Zero data for one modulus: from the dataset directory when given,
    /// else computed through the shared cache.
    fn modulus_zeros(
        &self,
        group: &CharacterGroup,
        cache: &mut ZeroCache,
    ) -> Result<ModulusZeros, CliFailure> {
        match &self.zeros_dir {
            Some(dir) => {
                let mz = ModulusZeros::from_dir(group, dir)?;
                if (mz.truncation() - self.t).abs() > 1e-9 && self.t != 100.0 {
                    eprintln!(
                        "note: dataset truncation {} differs from requested T = {}; using min",
                        mz.truncation(),
                        self.t
                    );
                }
                if mz.truncation() > self.t {
                    Ok(mz.truncated(self.t))
                } else {
                    Ok(mz)
                }
            }
            None => Ok(ModulusZeros::compute(
                group,
                self.t,
                ZeroFinderOptions::default(),
                cache,
            )?),
        }
    }

    fn siegel_datum(
        &self,
        which: u8,
        group: &CharacterGroup,
    ) -> Result<Option<SiegelDatum>, CliFailure> {
        let spec = if which == 1 { self.siegel1 } else { self.siegel2 };
        match spec {
            None => Ok(None),
            Some(s) => {
                let d = SiegelDatum::new(group.modulus(), s.label, s.beta)?;
                d.validate_against(group)?;
                Ok(Some(d))
            }
        }
    }

    fn emit(&self, body: String) -> Result<(), CliFailure> {
        match &self.out {
            None => {
                print!("{}", body);
                std::io::stdout()
                    .flush()
                    .map_err(|e| CliFailure::config(e.to_string()))?;
            }
            Some(path) => {
                std::fs::write(path, body)
                    .map_err(|e| CliFailure::config(format!("{}: {}", path.display(), e)))?;
            }
        }
        Ok(())
    }
}

fn sieve_for(xs: &[f64], extra: f64) -> Result<LambdaTable, CliFailure> {
    let max_x = xs.iter().cloned().fold(2.0f64, f64::max);
    let limit = (max_x + extra).ceil() as u64 + 2;
    Ok(LambdaTable::build(limit)?)
}

fn run(cli: Cli) -> Result<(), CliFailure> {
    match cli.command {
        Command::Sieve { common, limit } => {
            let r = resolve_common(&common, false)?;
            let file = match &common.config {
                Some(p) => ConfigFile::load(p)?,
                None => ConfigFile::default(),
            };
            let limit = file
                .resolve(&limit, "N")?
                .or_else(|| r.xs.first().map(|&x| x as u64))
                .ok_or_else(|| CliFailure::config("sieve needs --N"))?;
            let table = LambdaTable::build(limit)?;
            let out = r
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("lambda.ltbl"));
            table.dump_binary(&out)?;
            println!(
                "sieved N={} prime_powers={} wrote {}",
                limit,
                table.prime_powers().len(),
                out.display()
            );
            Ok(())
        }

        Command::Chars { common, q } => {
            let r = resolve_common(&common, false)?;
            let file = match &common.config {
                Some(p) => ConfigFile::load(p)?,
                None => ConfigFile::default(),
            };
            let q = file.resolve(&q, "q")?.unwrap_or(r.q1);
            let group = CharacterGroup::enumerate(q)?;
            let mut body = r.provenance();
            body.push('\n');
            body.push_str(&group.export_csv());
            r.emit(body)
        }

        Command::Zeros {
            common,
            q,
            validate,
        } => {
            let r = resolve_common(&common, false)?;
            let file = match &common.config {
                Some(p) => ConfigFile::load(p)?,
                None => ConfigFile::default(),
            };
            let q = file.resolve(&q, "q")?.unwrap_or(r.q1);
            let group = CharacterGroup::enumerate(q)?;

            if validate {
                let dir = r.zeros_dir.clone().ok_or_else(|| {
                    CliFailure::config("--validate needs --zeros-file DIR")
                })?;
                let mz = ModulusZeros::from_dir(&group, &dir)?;
                println!(
                    "validated {} characters mod {} at T = {}",
                    group.phi(),
                    q,
                    mz.truncation()
                );
                return Ok(());
            }

            let out_dir = r.out.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| CliFailure::config(format!("{}: {}", out_dir.display(), e)))?;
            let mut cache = ZeroCache::new();
            let mut written = std::collections::BTreeSet::new();
            for chi in group.characters() {
                let (f, star) = gbap_core::chars::conductor_and_primitive(chi)?;
                if !written.insert((f, star.label())) {
                    continue;
                }
                let set = cache.get_or_compute(&star, r.t, ZeroFinderOptions::default())?;
                let path = out_dir.join(zero_file_name(f, star.label()));
                save_zeros(&set, &path)?;
                println!(
                    "wrote {} ({} zeros, T = {})",
                    path.display(),
                    set.zeros().len(),
                    set.truncation()
                );
            }
            Ok(())
        }

        Command::VerifyTheorem { common } => {
            let r = resolve_common(&common, true)?;
            let table = sieve_for(&r.xs, 0.0)?;
            let group1 = CharacterGroup::enumerate(r.q1)?;
            let group2 = CharacterGroup::enumerate(r.q2)?;
            let mut cache = ZeroCache::new();
            let zeros1 = r.modulus_zeros(&group1, &mut cache)?;
            let zeros2 = r.modulus_zeros(&group2, &mut cache)?;
            let siegel1 = r.siegel_datum(1, &group1)?;
            let siegel2 = r.siegel_datum(2, &group2)?;

            let mut reports = Vec::new();
            for &x in &r.xs {
                let mut cfg = GoldbachConfig::new(x, r.q1, r.q2, r.a1, r.a2, r.t)?;
                cfg.exponents = r.exponents.clone();
                cfg.siegel1 = siegel1;
                cfg.siegel2 = siegel2;
                let report = assemble_report(
                    &table,
                    &cfg,
                    &group1,
                    &group2,
                    &zeros1,
                    &zeros2,
                    &r.zero_source_string(),
                )?;
                reports.push(report);
            }

            let body = if r.json {
                serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n"
            } else {
                let mut s = r.provenance();
                s.push('\n');
                s.push_str("X,S,main,H1,H2,Z,E,bound_ratio\n");
                for rep in &reports {
                    s.push_str(&rep.csv_row());
                    s.push('\n');
                }
                s
            };
            r.emit(body)
        }

        Command::Moments { common, h } => {
            let r = resolve_common(&common, true)?;
            let file = match &common.config {
                Some(p) => ConfigFile::load(p)?,
                None => ConfigFile::default(),
            };
            let h_spec = file.resolve(&h, "h")?;
            let want_k = h_spec.is_some();
            let h_of = |x: f64| -> Result<f64, CliFailure> {
                match h_spec.as_deref() {
                    None => Ok(0.0),
                    Some("sqrt") => Ok(x.sqrt().max(1.0)),
                    Some(v) => v
                        .parse::<f64>()
                        .map_err(|_| CliFailure::config(format!("bad --h value {:?}", v))),
                }
            };
            let max_h = if want_k {
                r.xs.iter()
                    .map(|&x| h_of(x))
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .fold(1.0f64, f64::max)
            } else {
                0.0
            };
            let table = sieve_for(&r.xs, max_h)?;
            let group = CharacterGroup::enumerate(r.q1)?;
            let prefix = gbap_core::arith::ProgressionPrefix::new(&table, r.q1, r.a1)?;
            let shift = match r.siegel_datum(1, &group)? {
                None => None,
                Some(d) => {
                    let chi = group.by_label(d.label).expect("validated");
                    Some(SiegelShift {
                        coef: chi.value(r.a1).re,
                        beta: d.beta,
                    })
                }
            };

            let mut rows = Vec::new();
            for &x in &r.xs {
                let m = if want_k {
                    second_moment_k(&table, &prefix, x, h_of(x)?, shift, r.b1)?
                } else {
                    second_moment_h(&table, &prefix, x, shift, r.b1)?
                };
                rows.push(m);
            }
            let body = if r.json {
                serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n"
            } else {
                let mut s = r.provenance();
                s.push('\n');
                s.push_str("x,h,q,a,value,bound_ratio,segment_count\n");
                for row in &rows {
                    s.push_str(&row.csv_row());
                    s.push('\n');
                }
                s
            };
            r.emit(body)
        }

        Command::Sums {
            common,
            lemma,
            beta,
            beta1,
            beta2,
        } => {
            let r = resolve_common(&common, true)?;
            let file = match &common.config {
                Some(p) => ConfigFile::load(p)?,
                None => ConfigFile::default(),
            };
            let lemma = file
                .resolve(&lemma, "lemma")?
                .ok_or_else(|| CliFailure::config("--lemma sumphi|beta|powers is required"))?;
            let beta = file.resolve(&beta, "beta")?.unwrap_or(0.75);
            let beta1 = file.resolve(&beta1, "beta1")?.unwrap_or(0.6);
            let beta2 = file.resolve(&beta2, "beta2")?.unwrap_or(0.9);

            match lemma.as_str() {
                "powers" => {
                    let mut s = r.provenance();
                    s.push('\n');
                    s.push_str(
                        "X,beta,beta1,beta2,lhs_single,main_single,ratio_single,lhs_pair,main_pair,ratio_pair\n",
                    );
                    let mut json_rows = Vec::new();
                    for &x in &r.xs {
                        let rep = power_sum_identities(x, beta, beta1, beta2)?;
                        if r.json {
                            json_rows.push(rep);
                        } else {
                            s.push_str(&format!(
                                "{:.16e},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                                x,
                                beta,
                                beta1,
                                beta2,
                                rep.lhs_single,
                                rep.main_single,
                                rep.ratio_single,
                                rep.lhs_pair,
                                rep.main_pair,
                                rep.ratio_pair
                            ));
                        }
                    }
                    let body = if r.json {
                        serde_json::to_string_pretty(&json_rows).expect("serialize") + "\n"
                    } else {
                        s
                    };
                    r.emit(body)
                }
                "sumphi" | "beta" => {
                    let table = sieve_for(&r.xs, 0.0)?;
                    let group = CharacterGroup::enumerate(r.q1)?;
                    let mut cache = ZeroCache::new();
                    let zeros = r.modulus_zeros(&group, &mut cache)?;
                    let prefix =
                        gbap_core::arith::ProgressionPrefix::new(&table, r.q1, r.a1)?;
                    let mut s = r.provenance();
                    s.push('\n');
                    s.push_str("X,q,a,beta,lhs,rhs,residual,ratio\n");
                    let mut json_rows = Vec::new();
                    for &x in &r.xs {
                        let rep = if lemma == "sumphi" {
                            sum_psi_progression(&prefix, x, r.a1, &group, &zeros)?
                        } else {
                            weighted_beta_sum(&table, x, r.a1, beta, &group, &zeros)?
                        };
                        if r.json {
                            json_rows.push(rep);
                        } else {
                            let b = if lemma == "sumphi" {
                                String::new()
                            } else {
                                format!("{}", beta)
                            };
                            s.push_str(&format!(
                                "{:.16e},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                                x, r.q1, r.a1, b, rep.lhs, rep.rhs, rep.residual, rep.ratio
                            ));
                        }
                    }
                    let body = if r.json {
                        serde_json::to_string_pretty(&json_rows).expect("serialize") + "\n"
                    } else {
                        s
                    };
                    r.emit(body)
                }
                other => Err(CliFailure::config(format!(
                    "unknown lemma {:?} (expected sumphi, beta, or powers)",
                    other
                ))),
            }
        }

        Command::Omega { common, y, p1 } => {
            let r = resolve_common(&common, true)?;
            let file = match &common.config {
                Some(p) => ConfigFile::load(p)?,
                None => ConfigFile::default(),
            };
            let y = file.resolve(&y, "y")?.unwrap_or(7);
            let p1 = file.resolve(&p1, "p1")?;
            let x = r.xs[0];
            let table = sieve_for(&[2.0 * x], 0.0)?;
            let construction =
                omega_construction(&table, x, y, r.q1, r.q2, r.a1, r.a2, p1)?;
            let scan = omega_scan(&table, x as u64, r.q1, r.q2, r.a1, r.a2)?;

            if r.json {
                let body = serde_json::to_string_pretty(&serde_json::json!({
                    "construction": construction,
                    "scan": scan,
                }))
                .expect("serialize")
                    + "\n";
                r.emit(body)
            } else {
                let mut s = r.provenance();
                s.push('\n');
                s.push_str(&format!(
                    "# construction: y={} Q={} lhs={:.16e} rhs={:.16e} pass={} excluded={}\n",
                    construction.prime_cutoff,
                    construction.primorial,
                    construction.lhs,
                    construction.rhs,
                    construction.pass,
                    construction
                        .excluded_prime
                        .map(|p| p.to_string())
                        .unwrap_or_else(|| "none".into())
                ));
                s.push_str("x,max_ratio,argmax_n\n");
                for row in &scan {
                    s.push_str(&format!(
                        "{},{:.16e},{}\n",
                        row.x, row.max_ratio, row.argmax_n
                    ));
                }
                r.emit(s)
            }
        }

        Command::Gallagher { common, q } => {
            let r = resolve_common(&common, true)?;
            let file = match &common.config {
                Some(p) => ConfigFile::load(p)?,
                None => ConfigFile::default(),
            };
            let q = file.resolve(&q, "q")?.unwrap_or(r.q1);
            let x = r.xs[0];
            let table = sieve_for(&[2.0 * x], 0.0)?;
            let report = gallagher_check(&table, x, q)?;
            if r.json {
                let body =
                    serde_json::to_string_pretty(&report).expect("serialize") + "\n";
                r.emit(body)
            } else {
                let mut s = r.provenance();
                s.push('\n');
                s.push_str("q,x,lhs,threshold,pass\n");
                s.push_str(&format!(
                    "{},{:.16e},{:.16e},{:.16e},{}\n",
                    report.modulus, report.x, report.lhs, report.threshold, report.pass
                ));
                r.emit(s)
            }
        }
    }
}
