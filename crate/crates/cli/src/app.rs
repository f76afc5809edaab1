//! Command-line front end: argument parsing and subcommand dispatch.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::{
    self, lp_spec, parse_groups, parse_intervals, parse_list, MechanismFile, SecretsFile,
};
use crate::emit::{write_records, TableFormat};
use crate::sweep::SweepConfig;
use crate::synth::{generate_synthetic, Profile, DEFAULT_SECRET_MEANS};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sumstat_privacy::bounds::{
    lower_bound_group, lower_bound_inter, lower_bound_lp, lower_bound_union, GammaValue,
};
use sumstat_privacy::distortion::{
    w2_empirical_exact, w2_empirical_mean_split, w2_empirical_sliced, w2_empirical_subsample,
    w2_gaussian_2d, w2_gaussian_diag, w2_gaussian_general, EXACT_CAP,
};
use sumstat_privacy::mechanisms::{
    release_alg1, release_alg2, release_alg3, release_baseline, release_dataset, MechanismId,
};
use sumstat_privacy::privacy::{
    analytic_privacy_alg1, empirical_prior, monte_carlo_privacy, surrogate_privacy, Attacker,
    McMechanism, Metric, DEFAULT_TRIALS,
};
use sumstat_privacy::{
    estimate_params, CsvOptions, Dataset, Family, Gaussian2DParams, GaussianDiagParams,
    GaussianGeneralParams, GroupPartition, NormOrder, PriorSpec, QuantizationMode, SecretSpec,
};

#[derive(Parser)]
#[command(
    name = "sumstat",
    version,
    about = "Summary-statistic privacy experiments"
)]
pub struct Cli {
    /// RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file, stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format for tables.
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    JsonLines,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Union,
    Inter,
    Group,
    Lp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Analytic,
    Surrogate,
    Mc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AttackerArg {
    PosteriorBin,
    Grid,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EstimatorArg {
    Auto,
    Exact,
    Subsample,
    MeanSplit,
    Sliced,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ParamFamily {
    DiagGaussian,
    Gaussian2d,
    GaussianGeneral,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mechanism on a dataset or a parameter file.
    Release {
        /// Input CSV (header row, numeric columns).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Parameter file instead of a dataset (alg1, alg2, alg3).
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "diag-gaussian")]
        family: ParamFamily,
        #[arg(long)]
        secrets: Option<PathBuf>,
        #[arg(long)]
        mechanism: String,
        #[arg(long)]
        config: PathBuf,
    },
    /// Privacy of a mechanism or of a released dataset.
    Privacy {
        #[arg(long, value_enum)]
        metric: MetricArg,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long)]
        secrets: PathBuf,
        /// Mechanism file (analytic, mc).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Groups such as "0,1;2", overriding the secrets file.
        #[arg(long)]
        groups: Option<String>,
        /// Norm order for lp, a number or "inf".
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        eps_p: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, value_enum, default_value = "posterior-bin")]
        attacker: AttackerArg,
        /// Prior support such as "0:30,0:72", overriding the secrets file.
        #[arg(long)]
        prior: Option<String>,
        /// Original dataset (surrogate; or prior source for mc).
        #[arg(long)]
        original: Option<PathBuf>,
        /// Released dataset (surrogate).
        #[arg(long)]
        released: Option<PathBuf>,
    },
    /// Wasserstein-2 distance between two datasets or two parameter files.
    Distortion {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        /// Treat `x` and `y` as parameter files of this family.
        #[arg(long, value_enum)]
        params: Option<ParamFamily>,
        #[arg(long, value_enum, default_value = "auto")]
        estimator: EstimatorArg,
        #[arg(long, default_value_t = 64)]
        projections: usize,
        #[arg(long, default_value_t = EXACT_CAP)]
        cap: usize,
    },
    /// Lower bounds over a grid of privacy budgets, as CSV.
    Bounds {
        #[arg(long)]
        secrets: Option<PathBuf>,
        /// Tolerances such as "1,4,3", instead of a secrets file.
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        groups: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        eps_p: Option<f64>,
        /// Conversion constant, sqrt(d)/2 by default.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        t_min: f64,
        #[arg(long, default_value_t = 0.95)]
        t_max: f64,
        #[arg(long, default_value_t = 19)]
        t_steps: usize,
    },
    /// Tradeoff sweep over mechanism hyperparameters.
    Sweep {
        /// Sweep config; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Input CSV; a synthetic table is generated when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        repeats: Option<usize>,
    },
    /// Synthetic web-traffic-like table as CSV.
    Synth {
        #[arg(long, default_value = "wwt-like")]
        profile: String,
        #[arg(long, default_value_t = 2000)]
        m: usize,
        #[arg(long, default_value_t = 5)]
        t: usize,
        /// Means of the leading secret columns.
        #[arg(long)]
        means: Option<String>,
    },
}

/// Executes one parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let mut out = open_output(cli.output.as_deref())?;
    match cli.command {
        Command::Release {
            input,
            params,
            family,
            secrets,
            mechanism,
            config,
        } => {
            let mech: MechanismId = mechanism.parse()?;
            let cfg = config::load::<MechanismFile>(&config)?.config()?;
            let spec = || -> Result<SecretSpec> {
                let path = secrets
                    .as_deref()
                    .context("--secrets is required for this mechanism")?;
                Ok(config::load::<SecretsFile>(path)?.spec()?)
            };
            match mech {
                MechanismId::Alg1 | MechanismId::Alg2 | MechanismId::Alg3 if params.is_some() => {
                    let path = params.as_deref().unwrap();
                    let json = match (mech, family) {
                        (MechanismId::Alg1, ParamFamily::DiagGaussian) => {
                            let p: GaussianDiagParams = config::load(path)?;
                            released_json(
                                release_alg1(&p, &spec()?, &cfg, seed)?.params,
                                mech,
                                Some(seed),
                            )?
                        }
                        (MechanismId::Alg2, ParamFamily::Gaussian2d) => {
                            let p: Gaussian2DParams = config::load(path)?;
                            released_json(release_alg2(&p, &spec()?, &cfg)?.params, mech, None)?
                        }
                        (MechanismId::Alg3, ParamFamily::GaussianGeneral) => {
                            let p: GaussianGeneralParams = config::load(path)?;
                            released_json(release_alg3(&p, &spec()?, &cfg)?.params, mech, None)?
                        }
                        _ => bail!("{mech} does not accept the chosen --family"),
                    };
                    writeln!(out, "{json}")?;
                }
                MechanismId::Alg1 => {
                    let data = read_dataset(input.as_deref())?;
                    let p = estimate_params(&data, Family::DiagGaussian).into_params()?;
                    let rel = release_alg1(&p, &spec()?, &cfg, seed)?;
                    writeln!(out, "{}", released_json(rel.params, mech, Some(seed))?)?;
                }
                MechanismId::Alg2 | MechanismId::Alg3 => bail!("{mech} needs --params"),
                MechanismId::Dataset => {
                    let data = read_dataset(input.as_deref())?;
                    let rel = release_dataset(&data, &spec()?, &cfg, seed)?;
                    write_dataset(rel.dataset.as_ref().expect("dataset release"), &mut out)?;
                }
                MechanismId::Ap | MechanismId::Distp | MechanismId::DpHist => {
                    let data = read_dataset(input.as_deref())?;
                    let baseline = cfg.baseline.context("config has no [baseline] section")?;
                    let rel = release_baseline(&data, &baseline, seed)?;
                    if rel.mechanism != mech {
                        bail!("config describes {}, not {mech}", rel.mechanism);
                    }
                    write_dataset(rel.dataset.as_ref().expect("dataset release"), &mut out)?;
                }
            }
        }
        Command::Privacy {
            metric,
            method,
            secrets,
            config: cfg_path,
            groups,
            p,
            eps_p,
            trials,
            attacker,
            prior,
            original,
            released,
        } => {
            let file: SecretsFile = config::load(&secrets)?;
            let spec = file.spec()?;
            let metric = match metric {
                MetricArg::Union => Metric::Union,
                MetricArg::Inter => Metric::Intersection,
                MetricArg::Group => Metric::Group {
                    partition: match groups {
                        Some(g) => parse_groups(&g)?,
                        None => file.partition()?,
                    },
                },
                MetricArg::Lp => Metric::Lp {
                    spec: match p {
                        Some(p) => lp_spec(p.parse::<NormOrder>()?, eps_p, spec.tolerances())?,
                        None => file.lp()?,
                    },
                },
            };
            let report = match method {
                MethodArg::Analytic => {
                    let cfg = load_mechanism(cfg_path.as_deref())?;
                    analytic_privacy_alg1(&spec, &cfg, &metric)?
                }
                MethodArg::Surrogate => {
                    let x = read_dataset(original.as_deref()).context("--original")?;
                    let y = read_dataset(released.as_deref()).context("--released")?;
                    surrogate_privacy(&x, &y, &spec, &metric)?
                }
                MethodArg::Mc => {
                    let cfg = load_mechanism(cfg_path.as_deref())?;
                    let support = match (prior, file.prior(&spec)?, original) {
                        (Some(s), _, _) => PriorSpec::new(parse_intervals(&s)?, &spec)?,
                        (None, Some(p), _) => p,
                        (None, None, Some(path)) => {
                            empirical_prior(&read_dataset(Some(&path))?, &spec)?
                        }
                        (None, None, None) => {
                            bail!("mc needs --prior, a prior in the secrets file, or --original")
                        }
                    };
                    let mech = match cfg.mode {
                        QuantizationMode::RandomOffset => McMechanism::Alg1(cfg),
                        QuantizationMode::Midpoint => McMechanism::Midpoint(cfg),
                    };
                    let attacker = match attacker {
                        AttackerArg::PosteriorBin => Attacker::PosteriorBin,
                        AttackerArg::Grid => Attacker::Grid,
                    };
                    monte_carlo_privacy(&mech, &support, &spec, &[metric], attacker, trials, seed)?
                        .remove(0)
                }
            };
            writeln!(out, "{}", serde_json::to_string(&report)?)?;
        }
        Command::Distortion {
            x,
            y,
            params,
            estimator,
            projections,
            cap,
        } => {
            #[derive(Serialize)]
            struct Record {
                value: f64,
                estimator: &'static str,
            }
            let rec = match params {
                Some(ParamFamily::DiagGaussian) => Record {
                    value: w2_gaussian_diag(&config::load(&x)?, &config::load(&y)?)?,
                    estimator: "closed-form-diag",
                },
                Some(ParamFamily::Gaussian2d) => Record {
                    value: w2_gaussian_2d(&config::load(&x)?, &config::load(&y)?),
                    estimator: "closed-form-2d",
                },
                Some(ParamFamily::GaussianGeneral) => Record {
                    value: w2_gaussian_general(&config::load(&x)?, &config::load(&y)?)?,
                    estimator: "closed-form-general",
                },
                None => {
                    let a = read_dataset(Some(&x))?;
                    let b = read_dataset(Some(&y))?;
                    let est = match estimator {
                        EstimatorArg::Auto if a.n_samples() <= EXACT_CAP => EstimatorArg::Exact,
                        EstimatorArg::Auto => EstimatorArg::MeanSplit,
                        e => e,
                    };
                    match est {
                        EstimatorArg::Exact => Record {
                            value: w2_empirical_exact(&a, &b)?,
                            estimator: "exact",
                        },
                        EstimatorArg::Subsample => Record {
                            value: w2_empirical_subsample(&a, &b, cap, seed)?,
                            estimator: "exact-subsample",
                        },
                        EstimatorArg::MeanSplit => Record {
                            value: w2_empirical_mean_split(&a, &b, cap, seed)?,
                            estimator: "mean-split",
                        },
                        EstimatorArg::Sliced => Record {
                            value: w2_empirical_sliced(&a, &b, projections, seed)?,
                            estimator: "sliced",
                        },
                        EstimatorArg::Auto => unreachable!(),
                    }
                }
            };
            writeln!(out, "{}", serde_json::to_string(&rec)?)?;
        }
        Command::Bounds {
            secrets,
            eps,
            groups,
            p,
            eps_p,
            gamma,
            t_min,
            t_max,
            t_steps,
        } => {
            let file = secrets
                .as_deref()
                .map(config::load::<SecretsFile>)
                .transpose()?;
            let eps: Vec<f64> = match (&eps, &file) {
                (Some(e), _) => parse_list(e)?,
                (None, Some(f)) => f.tolerances.clone(),
                (None, None) => bail!("give --secrets or --eps"),
            };
            let d = eps.len();
            let partition = match (&groups, &file) {
                (Some(g), _) => parse_groups(g)?,
                (None, Some(f)) => f.partition()?,
                (None, None) => GroupPartition::singletons(d),
            };
            let lp = match (&p, &file) {
                (Some(p), _) => lp_spec(p.parse()?, eps_p, &eps)?,
                (None, Some(f)) => f.lp()?,
                (None, None) => lp_spec(NormOrder::Finite(2.0), eps_p, &eps)?,
            };
            let gamma = match gamma {
                Some(g) => GammaValue::user(g)?,
                None => GammaValue::gaussian(d),
            };
            if !(t_min > 0.0 && t_max < 1.0 && t_min <= t_max && t_steps >= 1) {
                bail!("need 0 < t-min <= t-max < 1 and at least one step");
            }
            let mut wtr = csv::Writer::from_writer(&mut out);
            wtr.write_record(["T", "union", "inter", "group", "lp"])?;
            for k in 0..t_steps {
                let n = (t_steps - 1).max(1) as f64;
                let raw = t_min + (t_max - t_min) * k as f64 / n;
                let t = ((raw * 1e12).round() / 1e12).clamp(t_min, t_max);
                let row = [
                    t,
                    lower_bound_union(t, &eps, gamma)?,
                    lower_bound_inter(t, &eps, gamma)?,
                    lower_bound_group(t, &eps, &partition, gamma)?,
                    lower_bound_lp(t, &lp, d, gamma)?,
                ];
                wtr.write_record(row.iter().map(|v| v.to_string()))?;
            }
            wtr.flush()?;
        }
        Command::Sweep {
            config: cfg_path,
            input,
            repeats,
        } => {
            let mut cfg: SweepConfig = match &cfg_path {
                Some(p) => config::load(p)?,
                None => SweepConfig::default(),
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(r) = repeats {
                cfg.repeats = r;
            }
            let data = input
                .as_deref()
                .map(|p| read_dataset(Some(p)))
                .transpose()?;
            let records = cfg.run(data.as_ref())?;
            let format = match cli.format {
                None | Some(OutFormat::Csv) => TableFormat::Csv,
                Some(OutFormat::JsonLines) | Some(OutFormat::Json) => TableFormat::JsonLines,
            };
            write_records(&records, format, &mut out)?;
        }
        Command::Synth {
            profile,
            m,
            t,
            means,
        } => {
            let profile: Profile = profile.parse()?;
            let means = match means {
                Some(s) => parse_list(&s)?,
                None => DEFAULT_SECRET_MEANS.to_vec(),
            };
            let data = generate_synthetic(profile, m, t, &means, seed)?;
            write_dataset(&data, &mut out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_dataset(path: Option<&Path>) -> Result<Dataset> {
    let path = path.context("an input CSV is required")?;
    Dataset::from_csv_path(path, CsvOptions::default())
        .with_context(|| format!("reading {}", path.display()))
}

fn write_dataset(data: &Dataset, out: &mut dyn Write) -> Result<()> {
    data.write_csv(out, b',')?;
    Ok(())
}

fn load_mechanism(path: Option<&Path>) -> Result<sumstat_privacy::MechanismConfig> {
    let path = path.context("--config is required for this method")?;
    Ok(config::load::<MechanismFile>(path)?.config()?)
}

fn released_json<P: Serialize>(
    params: P,
    mechanism: MechanismId,
    seed: Option<u64>,
) -> Result<String> {
    #[derive(Serialize)]
    struct Released<P> {
        mechanism: MechanismId,
        #[serde(skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        params: P,
    }
    Ok(serde_json::to_string(&Released {
        mechanism,
        seed,
        params,
    })?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emit::read_records;
    use std::fs;

    struct Env {
        dir: tempfile::TempDir,
    }

    impl Env {
        fn new() -> Self {
            Env {
                dir: tempfile::tempdir().unwrap(),
            }
        }

        fn path(&self, name: &str) -> String {
            self.dir.path().join(name).to_str().unwrap().to_string()
        }

        fn file(&self, name: &str, body: &str) -> String {
            let p = self.path(name);
            fs::write(&p, body).unwrap();
            p
        }

        fn run(&self, args: &[&str]) -> Result<()> {
            let mut argv = vec!["sumstat"];
            argv.extend_from_slice(args);
            run(Cli::try_parse_from(argv)?)
        }

        fn read(&self, name: &str) -> String {
            fs::read_to_string(self.path(name)).unwrap()
        }

        fn secrets(&self) -> String {
            self.file(
                "secrets.toml",
                "means = [0, 1, 2]\ntolerances = [1.0, 4.0, 3.0]\ngroups = [[0, 1], [2]]\nprior = [[0.0, 30.0], [0.0, 120.0], [0.0, 90.0]]\n",
            )
        }

        fn alg1_config(&self) -> String {
            self.file("alg1.toml", "lengths = [6.0, 24.0, 18.0]\n")
        }
    }

    fn json(text: &str) -> serde_json::Value {
        serde_json::from_str(text.trim()).unwrap()
    }

    #[test]
    fn synth_is_byte_identical_per_seed() {
        let env = Env::new();
        for name in ["a.csv", "b.csv"] {
            env.run(&[
                "--seed",
                "4",
                "--output",
                &env.path(name),
                "synth",
                "--m",
                "50",
                "--t",
                "4",
            ])
            .unwrap();
        }
        env.run(&[
            "--seed",
            "5",
            "--output",
            &env.path("c.csv"),
            "synth",
            "--m",
            "50",
            "--t",
            "4",
        ])
        .unwrap();
        assert_eq!(env.read("a.csv"), env.read("b.csv"));
        assert_ne!(env.read("a.csv"), env.read("c.csv"));
        assert_eq!(env.read("a.csv").lines().count(), 51);
    }

    #[test]
    fn sweep_outputs_round_trip_and_repeat() {
        let env = Env::new();
        let cfg = env.file(
            "sweep.toml",
            "m = 200\nrepeats = 2\n[[mechanisms]]\nmechanism = \"alg1\"\nvalues = [3.0, 6.0]\n[[mechanisms]]\nmechanism = \"dp-hist\"\nvalues = [2.0]\nnoise_scale = 0.5\n",
        );
        for (name, fmt) in [
            ("a.csv", "csv"),
            ("b.csv", "csv"),
            ("a.jsonl", "json-lines"),
        ] {
            env.run(&[
                "--seed",
                "1",
                "--output",
                &env.path(name),
                "--format",
                fmt,
                "sweep",
                "--config",
                &cfg,
            ])
            .unwrap();
        }
        assert_eq!(env.read("a.csv"), env.read("b.csv"));
        let csv = read_records(TableFormat::Csv, env.read("a.csv").as_bytes()).unwrap();
        let jsonl = read_records(TableFormat::JsonLines, env.read("a.jsonl").as_bytes()).unwrap();
        assert_eq!(csv.len(), 6);
        assert_eq!(csv, jsonl);
    }

    #[test]
    fn empty_sweep_succeeds() {
        let env = Env::new();
        let cfg = env.file("empty.json", r#"{"mechanisms": []}"#);
        env.run(&["--output", &env.path("e.csv"), "sweep", "--config", &cfg])
            .unwrap();
        assert!(read_records(TableFormat::Csv, env.read("e.csv").as_bytes())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn bounds_table() {
        let env = Env::new();
        env.run(&[
            "--output",
            &env.path("b.csv"),
            "bounds",
            "--eps",
            "1,4,3",
            "--groups",
            "0,1;2",
            "--p",
            "inf",
        ])
        .unwrap();
        let text = env.read("b.csv");
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("T,union,inter,group,lp"));
        let rows: Vec<Vec<f64>> = lines
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 19);
        assert_eq!(rows[0][0], 0.05);
        for r in &rows {
            assert!(r[2] <= r[3] && r[3] <= r[1]);
        }

        let secrets = env.secrets();
        env.run(&[
            "--output",
            &env.path("c.csv"),
            "bounds",
            "--secrets",
            &secrets,
            "--t-steps",
            "3",
        ])
        .unwrap();
        assert_eq!(env.read("c.csv").lines().count(), 4);
        assert!(env.run(&["bounds"]).is_err());
    }

    #[test]
    fn release_params_and_datasets() {
        let env = Env::new();
        let secrets = env.secrets();
        let cfg = env.alg1_config();
        let params = env.file(
            "p.json",
            r#"{"means":[13.7,68.0,54.0],"stds":[1.0,2.0,3.0]}"#,
        );
        env.run(&[
            "--seed",
            "3",
            "--output",
            &env.path("r.json"),
            "release",
            "--params",
            &params,
            "--secrets",
            &secrets,
            "--mechanism",
            "alg1",
            "--config",
            &cfg,
        ])
        .unwrap();
        let out = json(&env.read("r.json"));
        assert_eq!(out["mechanism"], "alg1");
        let m0 = out["params"]["means"][0].as_f64().unwrap();
        assert!((12.0..18.0).contains(&m0));

        env.run(&[
            "--seed",
            "2",
            "--output",
            &env.path("x.csv"),
            "synth",
            "--m",
            "100",
            "--t",
            "3",
        ])
        .unwrap();
        let x = env.path("x.csv");
        env.run(&[
            "--output",
            &env.path("y.csv"),
            "release",
            "--input",
            &x,
            "--secrets",
            &secrets,
            "--mechanism",
            "dataset",
            "--config",
            &cfg,
        ])
        .unwrap();
        assert_eq!(env.read("y.csv").lines().count(), 101);

        let hist = env.file(
            "hist.toml",
            "[baseline]\nkind = \"dp-histogram\"\nbin_width = 2.0\nnoise_scale = 1.0\n",
        );
        env.run(&[
            "--output",
            &env.path("h.csv"),
            "release",
            "--input",
            &x,
            "--mechanism",
            "dp-hist",
            "--config",
            &hist,
        ])
        .unwrap();
        assert_eq!(env.read("h.csv").lines().count(), 101);
        let err = env
            .run(&[
                "--output",
                &env.path("h2.csv"),
                "release",
                "--input",
                &x,
                "--mechanism",
                "ap",
                "--config",
                &hist,
            ])
            .unwrap_err();
        assert!(err.to_string().contains("not ap"));
        assert!(env
            .run(&["release", "--mechanism", "alg9", "--config", &hist])
            .is_err());
        assert!(env
            .run(&["release", "--mechanism", "alg2", "--config", &cfg])
            .is_err());

        let two_d = env.file(
            "two.json",
            r#"{"mu1":1.0,"mu2":2.0,"lambda1":4.0,"lambda2":9.0,"alpha":0.3}"#,
        );
        let mid = env.file("mid.toml", "mode = \"midpoint\"\nlengths = [4.0]\n");
        let s1 = env.file("s1.toml", "means = [0]\ntolerances = [1.0]\n");
        env.run(&[
            "--output",
            &env.path("two_out.json"),
            "release",
            "--params",
            &two_d,
            "--family",
            "gaussian2d",
            "--secrets",
            &s1,
            "--mechanism",
            "alg2",
            "--config",
            &mid,
        ])
        .unwrap();
        let out = json(&env.read("two_out.json"));
        assert_eq!(out["params"]["mu1"].as_f64(), Some(2.0));
    }

    #[test]
    fn privacy_methods() {
        let env = Env::new();
        let secrets = env.secrets();
        let cfg = env.alg1_config();
        env.run(&[
            "--output",
            &env.path("a.json"),
            "privacy",
            "--metric",
            "union",
            "--method",
            "analytic",
            "--secrets",
            &secrets,
            "--config",
            &cfg,
        ])
        .unwrap();
        let v = json(&env.read("a.json"))["value"].as_f64().unwrap();
        assert!((v - 19.0 / 27.0).abs() < 1e-12);

        env.run(&[
            "--seed",
            "8",
            "--output",
            &env.path("mc.json"),
            "privacy",
            "--metric",
            "group",
            "--method",
            "mc",
            "--secrets",
            &secrets,
            "--config",
            &cfg,
            "--trials",
            "20000",
        ])
        .unwrap();
        let rep = json(&env.read("mc.json"));
        assert!((rep["value"].as_f64().unwrap() - 11.0 / 27.0).abs() < 0.02);
        assert_eq!(rep["n_trials"].as_u64(), Some(20000));

        env.run(&[
            "--seed",
            "2",
            "--output",
            &env.path("x.csv"),
            "synth",
            "--m",
            "100",
            "--t",
            "3",
        ])
        .unwrap();
        env.run(&[
            "--output",
            &env.path("y.csv"),
            "release",
            "--input",
            &env.path("x.csv"),
            "--secrets",
            &secrets,
            "--mechanism",
            "dataset",
            "--config",
            &cfg,
        ])
        .unwrap();
        env.run(&[
            "--output",
            &env.path("s.json"),
            "privacy",
            "--metric",
            "lp",
            "--p",
            "1",
            "--method",
            "surrogate",
            "--secrets",
            &secrets,
            "--original",
            &env.path("x.csv"),
            "--released",
            &env.path("y.csv"),
        ])
        .unwrap();
        let rep = json(&env.read("s.json"));
        assert_eq!(rep["method"], "surrogate");
        assert!(rep["value"].as_f64().unwrap() <= 0.0);

        assert!(env
            .run(&[
                "privacy",
                "--metric",
                "union",
                "--method",
                "surrogate",
                "--secrets",
                &secrets
            ])
            .is_err());
    }

    #[test]
    fn distortion_records() {
        let env = Env::new();
        let a = env.file("a.json", r#"{"means":[0,0],"stds":[1,2]}"#);
        let b = env.file("b.json", r#"{"means":[3,4],"stds":[1,2]}"#);
        env.run(&[
            "--output",
            &env.path("d.json"),
            "distortion",
            "--x",
            &a,
            "--y",
            &b,
            "--params",
            "diag-gaussian",
        ])
        .unwrap();
        let rec = json(&env.read("d.json"));
        assert_eq!(rec["value"].as_f64(), Some(5.0));
        assert_eq!(rec["estimator"], "closed-form-diag");

        let x = env.file("x.csv", "a,b\n0,0\n1,1\n2,0\n");
        let y = env.file("y.csv", "a,b\n3,4\n4,5\n5,4\n");
        env.run(&[
            "--output",
            &env.path("e.json"),
            "distortion",
            "--x",
            &x,
            "--y",
            &y,
        ])
        .unwrap();
        let rec = json(&env.read("e.json"));
        assert!((rec["value"].as_f64().unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(rec["estimator"], "exact");
        env.run(&[
            "--output",
            &env.path("f.json"),
            "distortion",
            "--x",
            &x,
            "--y",
            &y,
            "--estimator",
            "sliced",
        ])
        .unwrap();
        assert_eq!(json(&env.read("f.json"))["estimator"], "sliced");
    }
}
