use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use steinbasis::certify::{
    certify_psh, certify_sign_conditions, check_combined_feasibility, root_claims, CertifyConfig,
    CombinedFeasibility, PositivityCertificate, PshCertificate, RootClaims, Verdict,
};
use steinbasis::feasibility::{build_phi, CertificateDocument, CoeffSolution, Family};
use steinbasis::planes::{
    normalize, pullback_phi, verify_psi_image, Classification, CorrectionChoice, GradientReport, ImageReport,
    PlaneKind, PlaneUnion, PlanesError,
};
use steinbasis::poly::{Poly, Var};
use steinbasis::real::{to_f64, Precision};
use steinbasis::retract::{basis_scan, radial_line_check, FlowConfig, FlowField, RadialReport, ScanConfig, ScanReport};
use steinbasis::scalar::{format_rational, rational_to_f64, Rational};

use crate::args::{self, CertifyArgs, ConstructArgs, PlanesArgs, RetractArgs, SweepArgs, VerifyArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A JSON report and whether everything it describes was certified.
pub struct Outcome {
    pub report: Value,
    pub ok: bool,
}

impl Outcome {
    fn new(report: impl Serialize, ok: bool) -> Self {
        Outcome {
            report: serde_json::to_value(report).expect("reports serialize"),
            ok,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn config(c: &CertifyArgs) -> Result<CertifyConfig, CliError> {
    if c.grid <= Rational::from_integer(0.into()) {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    Ok(CertifyConfig {
        depth: c.depth,
        grid_spacing: c.grid.clone(),
        ..CertifyConfig::default()
    })
}

fn check_m(c: &CertifyArgs) -> Result<(), CliError> {
    if c.m <= Rational::from_integer(0.into()) {
        return Err(CliError::Usage("--M must be positive".into()));
    }
    Ok(())
}

#[derive(Serialize)]
pub struct CertSummary {
    pub verdict: Verdict,
    pub radius: String,
    pub annuli: usize,
    pub note: Option<String>,
}

impl From<&PositivityCertificate> for CertSummary {
    fn from(c: &PositivityCertificate) -> Self {
        CertSummary {
            verdict: c.verdict,
            radius: format_rational(&c.radius),
            annuli: c.annuli.len(),
            note: c.note.clone(),
        }
    }
}

/// Everything `verify` needs to recheck a construction.
#[derive(Serialize, Deserialize)]
pub struct CertificateFile {
    pub solution: CoeffSolution,
    pub psh: PshCertificate,
    pub phi_positive: PositivityCertificate,
    pub radial: PositivityCertificate,
}

struct Construction {
    solution: CoeffSolution,
    psh: PshCertificate,
    phi_positive: PositivityCertificate,
    radial: PositivityCertificate,
}

impl Construction {
    fn run(alpha: &Rational, m: &Rational, cfg: &CertifyConfig) -> Result<Self, String> {
        let solution = build_phi(alpha, m).map_err(|e| e.to_string())?;
        let phi = solution.phi();
        let (psh, (phi_positive, radial)) =
            rayon::join(|| certify_psh(phi, alpha, cfg), || certify_sign_conditions(phi, cfg));
        Ok(Construction {
            solution,
            psh,
            phi_positive,
            radial,
        })
    }

    fn certified(&self) -> bool {
        self.solution.ledger_holds() && self.psh.is_strict() && self.phi_positive.is_strict() && self.radial.is_strict()
    }

    fn radius(&self) -> Rational {
        self.psh
            .radius()
            .min(self.phi_positive.radius.clone())
            .min(self.radial.radius.clone())
    }
}

#[derive(Serialize)]
pub struct ConstructReport {
    pub command: &'static str,
    pub alpha: String,
    pub family: Option<Family>,
    pub solution: Option<CertificateDocument>,
    pub constraints: Vec<String>,
    pub ledger_holds: bool,
    pub levi_zz: Option<CertSummary>,
    pub levi_det16: Option<CertSummary>,
    pub phi_positive: Option<CertSummary>,
    pub radial: Option<CertSummary>,
    pub certified_radius: Option<String>,
    pub certified: bool,
    pub error: Option<String>,
}

fn construct_report(alpha: &Rational, c: &Result<Construction, String>) -> ConstructReport {
    match c {
        Ok(c) => ConstructReport {
            command: "construct",
            alpha: format_rational(alpha),
            family: Some(c.solution.family()),
            solution: Some(c.solution.document()),
            constraints: c.solution.constraints().iter().map(ToString::to_string).collect(),
            ledger_holds: c.solution.ledger_holds(),
            levi_zz: Some((&c.psh.zz).into()),
            levi_det16: Some((&c.psh.det16).into()),
            phi_positive: Some((&c.phi_positive).into()),
            radial: Some((&c.radial).into()),
            certified_radius: Some(format_rational(&c.radius())),
            certified: c.certified(),
            error: None,
        },
        Err(e) => ConstructReport {
            command: "construct",
            alpha: format_rational(alpha),
            family: None,
            solution: None,
            constraints: Vec::new(),
            ledger_holds: false,
            levi_zz: None,
            levi_det16: None,
            phi_positive: None,
            radial: None,
            certified_radius: None,
            certified: false,
            error: Some(e.clone()),
        },
    }
}

pub fn construct(a: &ConstructArgs) -> Result<Outcome, CliError> {
    check_m(&a.certify)?;
    let cfg = config(&a.certify)?;
    let c = Construction::run(&a.alpha, &a.certify.m, &cfg);
    if let (Some(dir), Ok(c)) = (&a.emit_certificate, &c) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let file = CertificateFile {
            solution: c.solution.clone(),
            psh: c.psh.clone(),
            phi_positive: c.phi_positive.clone(),
            radial: c.radial.clone(),
        };
        let path = dir.join("certificate.json");
        let text = serde_json::to_string_pretty(&file).expect("certificate serializes");
        fs::write(&path, text + "\n").map_err(io_err(&path))?;
        let path = dir.join("phi.txt");
        fs::write(&path, format!("{}\n", c.solution.phi())).map_err(io_err(&path))?;
    }
    let report = construct_report(&a.alpha, &c);
    let ok = report.certified;
    Ok(Outcome::new(report, ok))
}

#[derive(Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub alpha: String,
    pub family: Family,
    pub ledger_holds: bool,
    pub violated: Vec<String>,
    /// Recheck failures, `None` when the stored certificate replays.
    pub psh_error: Option<String>,
    pub phi_positive_error: Option<String>,
    pub radial_error: Option<String>,
    pub strict: bool,
    pub certified: bool,
}

pub fn verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(&a.certificate).map_err(io_err(&a.certificate))?;
    let file: CertificateFile =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", a.certificate.display())))?;
    let phi = file.solution.phi();
    let radial_target = &(&Poly::var(Var::U) * &phi.diff(Var::U)) + &(&Poly::var(Var::V) * &phi.diff(Var::V));
    let target_check = |c: &PositivityCertificate, want: &Poly<Rational>| -> Result<(), String> {
        if &c.target != want {
            return Err("target does not match phi".into());
        }
        c.recheck().map_err(|e| e.to_string())
    };
    let constraints = file.solution.constraints();
    let violated: Vec<String> = constraints.iter().filter(|c| !c.holds).map(ToString::to_string).collect();
    let report = VerifyReport {
        command: "verify",
        alpha: format_rational(file.solution.alpha()),
        family: file.solution.family(),
        ledger_holds: violated.is_empty(),
        violated,
        psh_error: file.psh.recheck(phi).err().map(|e| e.to_string()),
        phi_positive_error: target_check(&file.phi_positive, phi).err(),
        radial_error: target_check(&file.radial, &radial_target).err(),
        strict: file.psh.is_strict() && file.phi_positive.is_strict() && file.radial.is_strict(),
        certified: false,
    };
    let certified = report.ledger_holds
        && report.psh_error.is_none()
        && report.phi_positive_error.is_none()
        && report.radial_error.is_none()
        && report.strict
        && &file.psh.alpha == file.solution.alpha();
    let report = VerifyReport { certified, ..report };
    Ok(Outcome::new(report, certified))
}

#[derive(Serialize)]
pub struct SweepRow {
    pub alpha: String,
    pub family: Option<Family>,
    pub certified: bool,
    pub certified_radius: Option<String>,
    pub error: Option<String>,
}

#[derive(Serialize)]
pub struct SweepReport {
    pub command: &'static str,
    pub rows: Vec<SweepRow>,
    pub failures: usize,
    pub certified: bool,
}

pub fn sweep(a: &SweepArgs) -> Result<Outcome, CliError> {
    check_m(&a.certify)?;
    let cfg = config(&a.certify)?;
    let rows: Vec<SweepRow> = a
        .alphas
        .par_iter()
        .map(|alpha| {
            let r = construct_report(alpha, &Construction::run(alpha, &a.certify.m, &cfg));
            let error = match (&r.error, r.certified) {
                (Some(e), _) => Some(e.clone()),
                (None, false) => Some("certification failed".to_string()),
                (None, true) => None,
            };
            SweepRow {
                alpha: r.alpha,
                family: r.family,
                certified: r.certified,
                certified_radius: r.certified_radius,
                error,
            }
        })
        .collect();
    let failures = rows.iter().filter(|r| !r.certified).count();
    let report = SweepReport {
        command: "sweep",
        rows,
        failures,
        certified: failures == 0,
    };
    Ok(Outcome::new(report, failures == 0))
}

#[derive(Serialize)]
pub struct RootsReport {
    pub command: &'static str,
    pub claims: Option<RootClaims>,
    pub error: Option<String>,
    pub combined: CombinedFeasibility,
    pub passed: bool,
}

pub fn roots() -> Result<Outcome, CliError> {
    let claims = root_claims();
    let combined = check_combined_feasibility();
    let passed = claims.is_ok() && combined.holds;
    let (claims, error) = match claims {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(Outcome::new(
        RootsReport {
            command: "roots",
            claims,
            error,
            combined,
            passed,
        },
        passed,
    ))
}

#[derive(Serialize)]
pub struct PullbackSummary {
    pub n_corr: String,
    pub degree: u32,
    pub gradient: GradientReport,
}

#[derive(Serialize)]
pub struct PlanesReport {
    pub command: &'static str,
    pub union: PlaneUnion,
    pub label: String,
    pub alpha: Option<f64>,
    pub image: Option<ImageReport>,
    pub pullback: Option<PullbackSummary>,
    pub pullback_error: Option<String>,
    pub passed: bool,
}

fn label(pu: &PlaneUnion) -> String {
    match &pu.classification {
        Classification::Hyperbolic => "hyperbolic".into(),
        Classification::NonPolynomiallyConvex => "non-polynomially-convex (Weinstock)".into(),
        Classification::OutOfScope(r) => format!("out of scope: {r}"),
    }
}

pub fn planes(a: &PlanesArgs, seed: u64) -> Result<Outcome, CliError> {
    let usage = |e: PlanesError| CliError::Usage(e.to_string());
    let pu = match (&a.b, &a.mu) {
        (Some(b), _) if b.len() != 4 => return Err(CliError::Usage(format!("--B needs 4 entries, got {}", b.len()))),
        (Some(b), _) => normalize([[b[0].clone(), b[1].clone()], [b[2].clone(), b[3].clone()]]),
        (None, Some(mu)) if a.elliptic => PlaneUnion::elliptic(mu),
        (None, Some(mu)) => PlaneUnion::hyperbolic(mu),
        (None, None) => unreachable!("clap requires --B or --mu"),
    }
    .map_err(usage)?;
    if a.precision < 30 {
        return Err(usage(PlanesError::PrecisionTooLow(a.precision)));
    }
    let n = match a.n.as_str() {
        "auto" => CorrectionChoice::Auto,
        s => CorrectionChoice::Fixed(args::rational(s).map_err(CliError::Usage)?),
    };
    let has_map = pu.kind.is_some() && !matches!(pu.classification, Classification::OutOfScope(_));
    let alpha = has_map
        .then(|| pu.angles(&Precision::digits(a.precision)).map(|ang| to_f64(&ang.alpha)))
        .transpose()
        .map_err(usage)?;
    let image = has_map
        .then(|| verify_psi_image(&pu, a.samples, a.precision, seed))
        .transpose()
        .map_err(usage)?;
    let pullback = (pu.classification == Classification::Hyperbolic).then(|| {
        pullback_phi(&pu, &n, a.precision, a.gradient_samples, seed)
            .map(|(pb, gradient)| PullbackSummary {
                n_corr: format_rational(&pb.n_corr),
                degree: pb.degree,
                gradient,
            })
            .map_err(|e| e.to_string())
    });
    let passed = image.as_ref().is_some_and(|i| i.passed)
        && match &pullback {
            None => pu.kind == Some(PlaneKind::Elliptic),
            Some(Ok(p)) => p.gradient.passed,
            Some(Err(_)) => false,
        };
    let (pullback, pullback_error) = match pullback {
        None => (None, None),
        Some(Ok(p)) => (Some(p), None),
        Some(Err(e)) => (None, Some(e)),
    };
    let report = PlanesReport {
        command: "planes",
        label: label(&pu),
        union: pu,
        alpha,
        image,
        pullback,
        pullback_error,
        passed,
    };
    Ok(Outcome::new(report, passed))
}

#[derive(Serialize)]
pub struct RetractReport {
    pub command: &'static str,
    pub alpha: String,
    pub phi_positive: CertSummary,
    pub radial_certificate: CertSummary,
    pub certified_radius: String,
    pub scan: Option<ScanReport>,
    pub radial_lines: Option<RadialReport>,
    pub error: Option<String>,
    pub passed: bool,
}

pub fn retract(a: &RetractArgs, seed: u64) -> Result<Outcome, CliError> {
    check_m(&a.certify)?;
    let cfg = config(&a.certify)?;
    if a.eps.iter().any(|e| *e <= Rational::from_integer(0.into())) {
        return Err(CliError::Usage("--eps levels must be positive".into()));
    }
    let solution = match build_phi(&a.alpha, &a.certify.m) {
        Ok(s) => s,
        Err(e) => {
            let report = serde_json::json!({
                "command": "retract",
                "alpha": format_rational(&a.alpha),
                "error": e.to_string(),
                "passed": false,
            });
            return Ok(Outcome { report, ok: false });
        }
    };
    let (phi_cert, radial_cert) = certify_sign_conditions(solution.phi(), &cfg);
    let radius = phi_cert.radius.clone().min(radial_cert.radius.clone());
    let mut report = RetractReport {
        command: "retract",
        alpha: format_rational(&a.alpha),
        phi_positive: (&phi_cert).into(),
        radial_certificate: (&radial_cert).into(),
        certified_radius: format_rational(&radius),
        scan: None,
        radial_lines: None,
        error: None,
        passed: false,
    };
    if !(phi_cert.is_strict() && radial_cert.is_strict()) {
        report.error = Some("sign conditions not certified".into());
        return Ok(Outcome::new(report, false));
    }
    let field = FlowField::new(solution.phi().to_f64(), rational_to_f64(&radius));
    let scan_cfg = ScanConfig {
        eps: a.eps.iter().map(rational_to_f64).collect(),
        samples: a.samples,
        seed,
        flow: FlowConfig::default(),
        draws_per_sample: 10_000,
    };
    match basis_scan(&field, &scan_cfg) {
        Ok(scan) => {
            if let Some(path) = &a.csv {
                write_traces(path, &scan)?;
            }
            report.radial_lines = Some(radial_line_check(&field, a.lines, 64, seed));
            report.scan = Some(scan);
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    report.passed = report.scan.as_ref().is_some_and(|s| s.passed)
        && report.radial_lines.as_ref().is_some_and(|r| r.passed);
    let ok = report.passed;
    Ok(Outcome::new(report, ok))
}

fn write_traces(path: &Path, scan: &ScanReport) -> Result<(), CliError> {
    let csv_err = |e: csv::Error| CliError::Io {
        path: path.display().to_string(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["eps", "sample", "step", "x", "y", "u", "v", "phi"])
        .map_err(csv_err)?;
    for (level, traces) in scan.levels.iter().zip(&scan.traces) {
        for (k, t) in traces.iter().enumerate() {
            for (step, (p, phi)) in t.samples.iter().zip(&t.phi_values).enumerate() {
                w.write_record([
                    level.eps.to_string(),
                    k.to_string(),
                    step.to_string(),
                    p[0].to_string(),
                    p[1].to_string(),
                    p[2].to_string(),
                    p[3].to_string(),
                    phi.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush().map_err(io_err(path))
}
