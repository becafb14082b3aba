//! Command-line driver: configuration, orchestration, and report emission
//! for the measure-construction checkers.
//!
//! Subcommands: verify | measure | decay | regularity | restriction |
//! dimension | report. Every output file embeds the SHA-256 hash of the
//! resolved configuration and the bump-profile hash; identical config + seed
//! gives byte-identical CSV output.
//!
//! Exit codes: 0 pass, 2 lemma failure, 3 budget/cap exceeded, 4 bad config.

use clap::{Args, Parser, Subcommand};
use nfmeasure::analyze::{
    self, check_crt, check_exp_sum, check_fk_spectrum, check_separation, check_separation_facts,
    conv_instance, convstab_check, decay_scan, dimension_report, hausdorff_cover_sum, kball_check,
    landau_check, lower_bound_check, regularity_scan, restriction_ratio, ExponentFit, LemmaReport,
    RestrictionReport,
};
use nfmeasure::bump;
use nfmeasure::construct::{params_new, ConstructionParams};
use nfmeasure::nfcore::{nf_from_polynomial, poly_from_i64, NumberField};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

// ---------------------------------------------------------------------------
// Configuration.
// ---------------------------------------------------------------------------

/// Run configuration; a JSON file with these fields, all optional, may be
/// passed with --config, and individual flags override its fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunConfig {
    /// Monic integer polynomial, constant coefficient first (x^2+1 = [1,0,1]).
    field: Vec<i64>,
    tau: f64,
    rho: f64,
    /// Level scales M_1 < M_2 < ...; when empty, `growth_levels` levels are
    /// generated from `growth_start` by M -> ceil(M^{3/2}).
    ms: Vec<f64>,
    growth_start: f64,
    growth_levels: usize,
    /// Schwartz decay order used for truncation-tail estimates.
    schwartz_n: u32,
    /// Ideal-norm bound for the algebraic suites (exp_sum, separation, CRT).
    norm_bound: u64,
    /// Frequency box half-width for the exponential-sum identity.
    s_radius: i64,
    /// Exponent-fit tolerance and constant-transfer factor (reported, never
    /// silently widened).
    fit_tolerance: f64,
    constant_factor: f64,
    /// Landau bracket for |Q(M)| log M / M^d.
    landau_lo: f64,
    landau_hi: f64,
    out_dir: PathBuf,
    seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            field: vec![1, 0, 1],
            tau: 2.0,
            rho: 0.0,
            ms: vec![8.0, 16.0],
            growth_start: 8.0,
            growth_levels: 2,
            schwartz_n: 24,
            norm_bound: 50,
            s_radius: 6,
            fit_tolerance: 0.15,
            constant_factor: 4.0,
            landau_lo: 1.0 / 6.0,
            landau_hi: 4.0,
            out_dir: PathBuf::from("out"),
            seed: 5,
        }
    }
}

impl RunConfig {
    fn resolve(&mut self) -> Result<(), String> {
        if self.ms.is_empty() {
            let mut m = self.growth_start;
            for _ in 0..self.growth_levels.max(1) {
                self.ms.push(m);
                m = m.powf(1.5).ceil();
            }
        }
        if !(self.tau > 1.0) {
            return Err("tau must exceed 1".into());
        }
        if self.field.len() < 3 || self.field.last() != Some(&1) {
            return Err("field polynomial must be monic of degree >= 2".into());
        }
        Ok(())
    }

    fn hash(&self) -> String {
        // The output directory is plumbing, not semantics; it does not
        // participate in the hash so runs into different directories compare.
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        format!("{:x}", h.finalize())
    }

    fn field(&self) -> Result<NumberField, nfmeasure::Error> {
        nf_from_polynomial(&poly_from_i64(&self.field), false)
    }

    fn params(&self) -> Result<ConstructionParams, nfmeasure::Error> {
        params_new(&self.field()?, self.tau, self.rho, &self.ms, self.schwartz_n)
    }
}

// ---------------------------------------------------------------------------
// CLI surface.
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "nfmeasure",
    about = "Desk-scale checkers for the number-field measure construction"
)]
struct Cli {
    /// JSON configuration file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Overrides {
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    rho: Option<f64>,
    /// Comma-separated level scales, e.g. --ms 4,128
    #[arg(long, global = true, value_delimiter = ',')]
    ms: Option<Vec<f64>>,
    #[arg(long, global = true)]
    norm_bound: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the algebraic and spectral lemma suite.
    Verify,
    /// Build the construction and summarize levels, masses, and warnings.
    Measure {
        /// Level to report; 0 emits bump-profile facts only.
        #[arg(long, default_value_t = 0)]
        k: usize,
    },
    /// Fit the Fourier-decay exponent of mu_k.
    Decay {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 6)]
        generic_rays: usize,
        #[arg(long)]
        range_lo: Option<f64>,
        #[arg(long)]
        range_hi: Option<f64>,
    },
    /// Fit the ball-mass regularity exponent and check the k-ball bounds.
    Regularity {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 40)]
        radii: usize,
        #[arg(long, default_value_t = 16)]
        centers: usize,
        /// Single-level scale for the k-ball bound checks.
        #[arg(long, default_value_t = 8.0)]
        kball_m: f64,
    },
    /// Restriction-quotient growth comparison between two level scales.
    Restriction {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        /// The two single-level scales to compare, e.g. --m-pair 8,16
        #[arg(long, value_delimiter = ',', default_value = "8,16")]
        m_pair: Vec<f64>,
        /// Numerator box half-width as a fraction of M^{1+tau}.
        #[arg(long, default_value_t = 0.125)]
        box_fraction: f64,
    },
    /// Hausdorff covering-sum tails and E-membership witnesses.
    Dimension {
        #[arg(long, value_delimiter = ',', default_values_t = [100u64, 1000, 10000])]
        norm_bounds: Vec<u64>,
    },
    /// Summarize previously written reports from the output directory.
    Report,
}

// ---------------------------------------------------------------------------
// Output plumbing.
// ---------------------------------------------------------------------------

struct Emitter {
    out_dir: PathBuf,
    config_hash: String,
    profile_hash: String,
}

impl Emitter {
    fn new(cfg: &RunConfig) -> std::io::Result<Emitter> {
        std::fs::create_dir_all(&cfg.out_dir)?;
        Ok(Emitter {
            out_dir: cfg.out_dir.clone(),
            config_hash: cfg.hash(),
            profile_hash: bump::profile_hash(),
        })
    }

    fn write(&self, name: &str, body: &str) -> std::io::Result<()> {
        std::fs::write(self.out_dir.join(name), body)
    }

    fn csv_header(&self) -> String {
        format!(
            "# config_hash {}\n# profile_hash {}\n",
            self.config_hash, self.profile_hash
        )
    }

    /// LemmaReport as JSON (with hashes) plus a CSV of its scalar rows.
    fn lemma(&self, stem: &str, rep: &LemmaReport) -> std::io::Result<()> {
        let json = serde_json::json!({
            "config_hash": self.config_hash,
            "profile_hash": self.profile_hash,
            "report": rep,
        });
        self.write(&format!("{stem}.json"), &serde_json::to_string_pretty(&json).unwrap())?;
        let mut csv = self.csv_header();
        csv.push_str("kind,name,value\n");
        for (n, v) in &rep.computed {
            let _ = writeln!(csv, "computed,{n},{v}");
        }
        for (n, v) in &rep.bounds {
            let _ = writeln!(csv, "bound,{n},{v}");
        }
        let _ = writeln!(csv, "meta,pass,{}", rep.pass as u8);
        self.write(&format!("{stem}.csv"), &csv)
    }

    /// ExponentFit as JSON plus the fitted samples as CSV.
    fn fit(&self, stem: &str, fit: &ExponentFit) -> std::io::Result<()> {
        let json = serde_json::json!({
            "config_hash": self.config_hash,
            "profile_hash": self.profile_hash,
            "fit": fit,
        });
        self.write(&format!("{stem}.json"), &serde_json::to_string_pretty(&json).unwrap())?;
        let mut csv = self.csv_header();
        csv.push_str("log_abscissa,log_value\n");
        for (x, y) in &fit.samples {
            let _ = writeln!(csv, "{x},{y}");
        }
        self.write(&format!("{stem}.csv"), &csv)
    }
}

// ---------------------------------------------------------------------------
// Command bodies. Each returns the list of (name, pass) outcomes.
// ---------------------------------------------------------------------------

type Outcome = Result<Vec<(String, bool)>, nfmeasure::Error>;

fn box_of(radius: f64, d: usize) -> (Vec<f64>, Vec<f64>) {
    (vec![-radius; d], vec![radius; d])
}

fn cmd_verify(cfg: &RunConfig, em: &Emitter) -> Outcome {
    let kf = cfg.field()?;
    let params = cfg.params()?;
    let mut out = Vec::new();
    let mut run = |stem: &str, rep: LemmaReport| -> Result<(), nfmeasure::Error> {
        println!("{:<20} {}", rep.lemma, if rep.pass { "pass" } else { "FAIL" });
        out.push((rep.lemma.clone(), rep.pass));
        em.lemma(stem, &rep).map_err(io_err)?;
        Ok(())
    };
    run(
        "exp_sum",
        check_exp_sum(&kf, cfg.norm_bound, -cfg.s_radius, cfg.s_radius)?,
    )?;
    run("crt", check_crt(&kf, cfg.norm_bound.min(50), 5, cfg.seed)?)?;
    let (lo, hi) = box_of(0.6, kf.d);
    run("separation", check_separation(&kf, cfg.norm_bound.min(50), &lo, &hi)?)?;
    run("separation_facts", check_separation_facts(&params, 1)?)?;
    run(
        "fk_spectrum",
        check_fk_spectrum(&params, 1, (params.level(1)?.m.powf(1.0 + cfg.tau) * 1.5) as i64)?,
    )?;
    let inst = conv_instance(2, 24, 1, 32.0, 256.0, 23.0, cfg.seed, false)?;
    run("convstab", convstab_check(&inst)?)?;
    run(
        "landau",
        landau_check(&kf, &cfg.ms, (cfg.landau_lo, cfg.landau_hi))?,
    )?;
    Ok(out)
}

fn cmd_measure(cfg: &RunConfig, em: &Emitter, k: usize) -> Outcome {
    let mut csv = em.csv_header();
    if k == 0 {
        // Bump-profile facts only.
        csv.push_str("name,value\n");
        let _ = writeln!(csv, "c_norm,{}", bump::PROFILE.c_norm);
        let _ = writeln!(csv, "small_c,{}", bump::small_c(2));
        let _ = writeln!(csv, "schwartz_constant_n2,{}", bump::schwartz_constant(2, 1e4));
        em.write("measure.csv", &csv).map_err(io_err)?;
        println!("measure              pass (bump profile facts)");
        return Ok(vec![("measure".into(), true)]);
    }
    let params = cfg.params()?;
    params.level(k)?;
    csv.push_str("level,m,eta,c,p_mult,families,weight_total\n");
    for j in 1..=k {
        let lev = params.level(j)?;
        let _ = writeln!(
            csv,
            "{j},{},{},{},{},{},{}",
            lev.m,
            lev.eta,
            lev.c,
            lev.p_mult,
            lev.families.len(),
            lev.weight_total
        );
    }
    em.write("measure.csv", &csv).map_err(io_err)?;
    // Consistency of the two integration paths: total mass by ball quadrature
    // vs the Fourier transform at 0.
    let mass = params.ball_mass(k, &vec![0.25; params.field.d], 1.0)?.mass;
    let hat0 = params.mu_hat_direct(k, &vec![0.0; params.field.d])?.re;
    let pass = (mass - hat0).abs() < 1e-8 * mass.max(1.0);
    println!(
        "measure              {} (|mu_{k}| = {mass:.12}, mu_hat(0) = {hat0:.12})",
        if pass { "pass" } else { "FAIL" }
    );
    Ok(vec![("measure".into(), pass)])
}

fn cmd_decay(
    cfg: &RunConfig,
    em: &Emitter,
    k: Option<usize>,
    generic_rays: usize,
    range: (Option<f64>, Option<f64>),
) -> Outcome {
    let params = cfg.params()?;
    let k = k.unwrap_or(cfg.ms.len());
    let m_last = *cfg.ms.last().unwrap();
    let lo = range.0.unwrap_or(cfg.ms[0].powf(1.0 + cfg.tau) / 4.0 * 0.9);
    let hi = range.1.unwrap_or(m_last.powf(1.0 + cfg.tau) * 16.0);
    let fit = decay_scan(&params, k, generic_rays, (lo, hi), cfg.seed)?;
    em.fit("decay", &fit).map_err(io_err)?;
    println!(
        "decay                {} (slope {:.4}, target {:.4} + {:.2})",
        if fit.pass { "pass" } else { "FAIL" },
        fit.slope,
        fit.target,
        fit.tolerance
    );
    Ok(vec![("decay".into(), fit.pass)])
}

fn cmd_regularity(
    cfg: &RunConfig,
    em: &Emitter,
    k: Option<usize>,
    radii: usize,
    centers: usize,
    kball_m: f64,
) -> Outcome {
    let params = cfg.params()?;
    let k = k.unwrap_or(cfg.ms.len());
    let fit = regularity_scan(&params, k, radii, centers)?;
    em.fit("regularity", &fit).map_err(io_err)?;
    // Per-ball bounds on a dedicated single level: they need an M large
    // enough that J-clear balls exist among the support samples.
    let kb_params = params_new(&cfg.field()?, cfg.tau, cfg.rho, &[kball_m], cfg.schwartz_n)?;
    let kb = kball_check(&kb_params, 1)?;
    em.lemma("kball", &kb).map_err(io_err)?;
    println!(
        "regularity           {} (slope {:.4}, target {:.4} - {:.2})",
        if fit.pass { "pass" } else { "FAIL" },
        fit.slope,
        fit.target,
        fit.tolerance
    );
    println!("kball                {}", if kb.pass { "pass" } else { "FAIL" });
    Ok(vec![("regularity".into(), fit.pass), ("kball".into(), kb.pass)])
}

#[derive(Serialize)]
struct GrowthComparison {
    p: f64,
    q: f64,
    p_fail: f64,
    low: RestrictionReport,
    high: RestrictionReport,
    growth: f64,
    lower_bounds: Vec<LemmaReport>,
    lower_bound_spread: f64,
}

fn cmd_restriction(
    cfg: &RunConfig,
    em: &Emitter,
    p: Option<f64>,
    q: f64,
    m_pair: &[f64],
    box_fraction: f64,
) -> Outcome {
    let kf = cfg.field()?;
    let d = kf.d;
    let p_fail = analyze::p_fail(cfg.tau, cfg.rho, q, d)?;
    let p = p.unwrap_or(p_fail - 1.0);
    if m_pair.len() != 2 || m_pair[1] <= m_pair[0] {
        return Err(nfmeasure::Error::InvalidParam(
            "--m-pair needs two increasing scales".into(),
        ));
    }
    let pair = [m_pair[0], m_pair[1]];
    let mut reports = Vec::new();
    let mut lower = Vec::new();
    for &m in &pair {
        let params = params_new(&kf, cfg.tau, cfg.rho, &[m], cfg.schwartz_n)?;
        let step = 0.9 / (2.0 * m.ln().powi(2));
        let r = restriction_ratio(&params, 1, p, q, step, m.powf(1.0 + cfg.tau) * box_fraction)?;
        lower.push(lower_bound_check(&params, 1, m.powf(1.0 + cfg.tau) * 1.2)?);
        reports.push(r);
    }
    let growth = reports[1].ratio / reports[0].ratio;
    let lbs: Vec<f64> = lower.iter().map(|l| l.fitted_constant).collect();
    let spread = lbs.iter().cloned().fold(f64::MIN, f64::max)
        / lbs.iter().cloned().fold(f64::MAX, f64::min);
    let pass = lower.iter().all(|l| l.pass) && spread <= cfg.constant_factor;
    let cmp = GrowthComparison {
        p,
        q,
        p_fail,
        low: reports.remove(0),
        high: reports.remove(0),
        growth,
        lower_bounds: lower,
        lower_bound_spread: spread,
    };
    let json = serde_json::json!({
        "config_hash": em.config_hash,
        "profile_hash": em.profile_hash,
        "comparison": &cmp,
    });
    em.write("restriction.json", &serde_json::to_string_pretty(&json).unwrap())
        .map_err(io_err)?;
    let mut csv = em.csv_header();
    csv.push_str("m,ratio,numerator,denominator,lower_bound_constant\n");
    for (i, &m) in pair.iter().enumerate() {
        let r = if i == 0 { &cmp.low } else { &cmp.high };
        let _ = writeln!(csv, "{m},{},{},{},{}", r.ratio, r.numerator, r.denominator, lbs[i]);
    }
    em.write("restriction.csv", &csv).map_err(io_err)?;
    println!(
        "restriction          {} (growth {:.4} at p={p}, p_fail={p_fail}, lb spread {:.3})",
        if pass { "pass" } else { "FAIL" },
        growth,
        spread
    );
    Ok(vec![("restriction".into(), pass)])
}

fn cmd_dimension(cfg: &RunConfig, em: &Emitter, norm_bounds: &[u64]) -> Outcome {
    let kf = cfg.field()?;
    let rep = dimension_report(&kf, cfg.tau, norm_bounds)?;
    em.lemma("dimension", &rep).map_err(io_err)?;
    // Raw tails for external plotting.
    let threshold = 2.0 * kf.d as f64 / (1.0 + cfg.tau);
    let mut csv = em.csv_header();
    csv.push_str("s_exp,norm_bound,tail\n");
    for s in [threshold + 0.3, threshold - 0.3] {
        for &nb in norm_bounds {
            let tail = hausdorff_cover_sum(&kf, s, cfg.tau, nb)?;
            let _ = writeln!(csv, "{s},{nb},{tail}");
        }
    }
    em.write("dimension_tails.csv", &csv).map_err(io_err)?;
    println!("dimension            {}", if rep.pass { "pass" } else { "FAIL" });
    Ok(vec![("dimension".into(), rep.pass)])
}

fn cmd_report(cfg: &RunConfig) -> Outcome {
    let mut out = Vec::new();
    let dir = &cfg.out_dir;
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    entries.sort();
    for path in entries {
        let body = std::fs::read_to_string(&path).map_err(io_err)?;
        let v: serde_json::Value = serde_json::from_str(&body)
            .map_err(|e| nfmeasure::Error::InvalidParam(format!("bad report {path:?}: {e}")))?;
        let pass = v
            .pointer("/report/pass")
            .or_else(|| v.pointer("/fit/pass"))
            .or_else(|| v.pointer("/comparison/low/ratio").map(|_| &serde_json::Value::Bool(true)))
            .and_then(|b| b.as_bool())
            .unwrap_or(true);
        let name = path.file_stem().unwrap().to_string_lossy().to_string();
        println!("{name:<20} {}", if pass { "pass" } else { "FAIL" });
        out.push((name, pass));
    }
    if out.is_empty() {
        return Err(nfmeasure::Error::InvalidParam(format!(
            "no reports found in {dir:?}"
        )));
    }
    Ok(out)
}

fn io_err(e: std::io::Error) -> nfmeasure::Error {
    nfmeasure::Error::InvalidParam(format!("io: {e}"))
}

// ---------------------------------------------------------------------------

fn load_config(path: Option<&Path>, ov: &Overrides) -> Result<RunConfig, String> {
    let mut cfg: RunConfig = match path {
        Some(p) => {
            let body = std::fs::read_to_string(p).map_err(|e| format!("config {p:?}: {e}"))?;
            serde_json::from_str(&body).map_err(|e| format!("config {p:?}: {e}"))?
        }
        None => RunConfig::default(),
    };
    if let Some(t) = ov.tau {
        cfg.tau = t;
    }
    if let Some(r) = ov.rho {
        cfg.rho = r;
    }
    if let Some(ms) = &ov.ms {
        cfg.ms = ms.clone();
    }
    if let Some(nb) = ov.norm_bound {
        cfg.norm_bound = nb;
    }
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if let Some(d) = &ov.out_dir {
        cfg.out_dir = d.clone();
    }
    cfg.resolve()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(cli.config.as_deref(), &cli.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(4);
        }
    };
    let em = match Emitter::new(&cfg) {
        Ok(em) => em,
        Err(e) => {
            eprintln!("config error: cannot open output dir: {e}");
            return ExitCode::from(4);
        }
    };
    let result = match &cli.cmd {
        Cmd::Verify => cmd_verify(&cfg, &em),
        Cmd::Measure { k } => cmd_measure(&cfg, &em, *k),
        Cmd::Decay { k, generic_rays, range_lo, range_hi } => {
            cmd_decay(&cfg, &em, *k, *generic_rays, (*range_lo, *range_hi))
        }
        Cmd::Regularity { k, radii, centers, kball_m } => {
            cmd_regularity(&cfg, &em, *k, *radii, *centers, *kball_m)
        }
        Cmd::Restriction { p, q, m_pair, box_fraction } => {
            cmd_restriction(&cfg, &em, *p, *q, m_pair, *box_fraction)
        }
        Cmd::Dimension { norm_bounds } => cmd_dimension(&cfg, &em, norm_bounds),
        Cmd::Report => cmd_report(&cfg),
    };
    match result {
        Ok(outcomes) => {
            if outcomes.iter().all(|(_, p)| *p) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(nfmeasure::Error::CapExceeded(msg)) => {
            eprintln!("budget exceeded: {msg}");
            ExitCode::from(3)
        }
        Err(nfmeasure::Error::InvalidParam(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
