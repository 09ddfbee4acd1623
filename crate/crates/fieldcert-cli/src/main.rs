//! Command-line surface: ingest boundary datasets, run the breakdown and
//! yield certificates, construct inclusions, and synthesize oracle data.
//!
//! Exit codes: 0 no certificate, 1 bad input, 2 breakdown/yield certified,
//! 3 inconclusive geometry. Reports are deterministic: identical inputs
//! produce byte-identical JSON and SVG.

use clap::{Args, Parser, Subcommand};
use fieldcert::boundary::synthetic::RingGeometry;
use fieldcert::boundary::{average_power, elastic_moments, BoundaryDataset, MomentSet};
use fieldcert::complexq::{certify_from_datasets, ComplexPair};
use fieldcert::elastic::{
    split_point_verdicts, viscoelastic_solve, yield_certificate, ElasticMeasurements, ElasticPair,
};
use fieldcert::eomega::{
    boundary_curve, random_atlas, synthesize_boundary_dataset, transform_generator, validate,
    RationalGenerator, ValidateOptions,
};
use fieldcert::geometry::{
    render_svg, Constraint2, Quadratic, Region2, Region3, RegionStyle, StyledRegion, Viewport,
};
use fieldcert::math::Vec2;
use fieldcert::real::{
    criterion1_surface_check, criterion2_check, criterion3_check, criterion4_perturbation,
    first_breakdown_phase, ConductivityPair, FirstBreakdown,
};
use fieldcert::solver::{extract_boundary_dataset, interior_stats, real_fields, solve, PhaseGrid};
use fieldcert::twobc::{breakdown_certificate_3d, improved_certificate_2d, TwoBcInputs};
use fieldcert::verdict::CriterionVerdict;
use fieldcert::Error;
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_SAFE: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_CERTIFIED: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fieldcert",
    version,
    about = "Breakdown certificates for two-phase bodies from boundary data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Real conductivity, one boundary condition: surface, average-field,
    /// power-budget, and perturbation criteria.
    AnalyzeReal(AnalyzeReal),
    /// Real conductivity, two boundary conditions: splitting certificates.
    AnalyzeTwoBc(AnalyzeTwoBc),
    /// Complex conductivity at fixed frequency: ellipse feasibility.
    AnalyzeComplex(AnalyzeComplex),
    /// Two-dimensional elasticity: yield compatibility.
    AnalyzeElastic(AnalyzeElastic),
    /// Inclusions supporting a constant interior field.
    #[command(subcommand)]
    Eomega(EomegaCmd),
    /// Forward-solve a phase grid and write the boundary dataset.
    Synthesize(Synthesize),
}

#[derive(Args)]
struct AnalyzeReal {
    /// Boundary dataset JSON.
    #[arg(long)]
    data: PathBuf,
    /// Material JSON: `{"sigma": [s1, s2], "c": [c1, c2], "f": [f1, f2]}`.
    #[arg(long)]
    materials: PathBuf,
    /// Per-sample boundary phase labels (JSON array of 1/2) for the surface check.
    #[arg(long)]
    phases: Option<PathBuf>,
    /// Perturbed-conductivity dataset for the energy criterion.
    #[arg(long)]
    perturbed: Option<PathBuf>,
    /// Conductivity perturbation "d1,d2" used for --perturbed.
    #[arg(long)]
    dsigma: Option<String>,
    /// Write the JSON report here (also printed to stdout).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Slack tolerance recorded in the report.
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
}

#[derive(Args)]
struct AnalyzeTwoBc {
    #[arg(long)]
    data1: PathBuf,
    #[arg(long)]
    data2: PathBuf,
    #[arg(long)]
    materials: PathBuf,
    /// Weights "w1,w2" for the weighted determinant bound.
    #[arg(long, default_value = "1,1")]
    weights: String,
    /// Render the free-variable regions (a plane slice) to this SVG path.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
}

#[derive(Args)]
struct AnalyzeComplex {
    /// Real-part dataset (potential and flux of the in-phase component).
    #[arg(long)]
    data_re: PathBuf,
    /// Imaginary-part dataset.
    #[arg(long)]
    data_im: PathBuf,
    /// Material JSON: `{"sigma": [[re,im],[re,im]], "c": [...], "f": [...], "omega": w}`.
    #[arg(long)]
    materials: PathBuf,
    /// Tighten the feasible region with the null-Lagrangian floors.
    #[arg(long)]
    improved: bool,
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
}

#[derive(Args)]
struct AnalyzeElastic {
    /// Displacement/traction dataset JSON.
    #[arg(long)]
    data: PathBuf,
    /// Material JSON: `{"kappa": [...], "mu": [...], "f": [...], "k": [...]}`.
    #[arg(long)]
    materials: PathBuf,
    /// Viscoelastic perturbation JSON enabling the four-equation solve.
    #[arg(long)]
    viscoelastic: Option<PathBuf>,
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
}

#[derive(Subcommand)]
enum EomegaCmd {
    /// Sample the inclusion boundary to CSV (and optionally SVG).
    Generate {
        #[arg(long)]
        generator: PathBuf,
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        out_svg: Option<PathBuf>,
    },
    /// Run the generator checks; writes the report, never fails the process.
    Validate {
        #[arg(long)]
        generator: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Shear/stretch the generator: x' = gamma1 x + gamma2-re y.
    Transform {
        #[arg(long)]
        generator: PathBuf,
        #[arg(long)]
        gamma1: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma2_re: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        out_csv: Option<PathBuf>,
    },
    /// Rejection-sample validated generators; deterministic under --seed.
    Atlas {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        max_poles: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Exact boundary dataset for a circular body containing the inclusion.
    Synthesize {
        #[arg(long)]
        generator: PathBuf,
        #[arg(long)]
        sigma1: f64,
        #[arg(long, default_value_t = 3.0)]
        radius: f64,
        #[arg(long, default_value_t = 2048)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
        /// Write a materials file with the inclusion fraction next to it.
        #[arg(long)]
        out_materials: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Synthesize {
    /// Phase grid: JSON (`{"nx","ny","h","phase"}`) or a '1'/'2' text mask.
    #[arg(long)]
    grid: PathBuf,
    /// Cell size when loading a text mask (default: 1/rows).
    #[arg(long, default_value_t = 0.0)]
    cell: f64,
    /// Conductivities "s1,s2".
    #[arg(long)]
    sigma: String,
    /// Dirichlet boundary potential: "linear:ax,ay" (V = -(ax x + ay y))
    /// or "laminate-series:f1" (exact series profile).
    #[arg(long, default_value = "linear:1,0")]
    bc: String,
    #[arg(long)]
    out: PathBuf,
    /// Write interior statistics (oracle mode) to this sidecar path.
    #[arg(long)]
    oracle: Option<PathBuf>,
    /// Also write boundary phase labels here.
    #[arg(long)]
    out_phases: Option<PathBuf>,
    /// Export the cell-centered solution fields as CSV.
    #[arg(long)]
    out_fields: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            EXIT_INPUT
        }
    };
    ExitCode::from(code)
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::AnalyzeReal(a) => analyze_real(a),
        Command::AnalyzeTwoBc(a) => analyze_two_bc(a),
        Command::AnalyzeComplex(a) => analyze_complex(a),
        Command::AnalyzeElastic(a) => analyze_elastic(a),
        Command::Eomega(c) => eomega(c),
        Command::Synthesize(s) => synthesize(s),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))
}

fn write_out(path: &Path, contents: &str) -> Result<(), String> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| format!("{}: {}", dir.display(), e))?;
        }
    }
    fs::write(path, contents).map_err(|e| format!("{}: {}", path.display(), e))
}

/// FNV-1a digest of input bytes; identifies inputs inside reports.
fn digest(text: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{:016x}", h)
}

fn parse_pair_arg(text: &str, what: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(format!(
            "{}: expected two comma-separated numbers, got '{}'",
            what, text
        ));
    }
    let a = parts[0]
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("{}: {}", what, e))?;
    let b = parts[1]
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("{}: {}", what, e))?;
    Ok([a, b])
}

fn verdict_value(v: &CriterionVerdict) -> Value {
    serde_json::to_value(v).expect("verdict serializes")
}

struct ReportBuilder {
    body: serde_json::Map<String, Value>,
    verdicts: Vec<Value>,
    inconclusive: bool,
}

impl ReportBuilder {
    fn new(command: &str, inputs: Vec<(&str, String)>, tolerance: f64) -> Self {
        let mut body = serde_json::Map::new();
        body.insert("tool".into(), json!("fieldcert"));
        body.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        body.insert("command".into(), json!(command));
        let digests: serde_json::Map<String, Value> = inputs
            .into_iter()
            .map(|(k, v)| (k.to_string(), json!(v)))
            .collect();
        body.insert("input-digests".into(), Value::Object(digests));
        body.insert("tolerance".into(), json!(tolerance));
        ReportBuilder {
            body,
            verdicts: vec![],
            inconclusive: false,
        }
    }

    fn field(&mut self, key: &str, value: Value) {
        self.body.insert(key.into(), value);
    }

    fn push_verdict(&mut self, v: &CriterionVerdict) {
        self.verdicts.push(verdict_value(v));
    }

    fn mark_inconclusive(&mut self) {
        self.inconclusive = true;
    }

    fn finish(mut self, report_path: Option<&Path>) -> Result<u8, String> {
        let violated = self
            .verdicts
            .iter()
            .any(|v| v.get("violated").and_then(Value::as_bool).unwrap_or(false));
        let code = if violated {
            EXIT_CERTIFIED
        } else if self.inconclusive {
            EXIT_INCONCLUSIVE
        } else {
            EXIT_SAFE
        };
        self.body
            .insert("verdicts".into(), Value::Array(self.verdicts));
        self.body.insert("exit-code".into(), json!(code));
        let text =
            serde_json::to_string_pretty(&Value::Object(self.body)).expect("report serializes");
        println!("{}", text);
        if let Some(p) = report_path {
            write_out(p, &text)?;
        }
        Ok(code)
    }
}

// ---------------------------------------------------------------------------
// analyze-real

#[derive(Deserialize)]
struct RealMaterials {
    sigma: [f64; 2],
    c: [f64; 2],
    f: [f64; 2],
}

fn analyze_real(a: AnalyzeReal) -> Result<u8, String> {
    let data_text = read(&a.data)?;
    let mat_text = read(&a.materials)?;
    let data = BoundaryDataset::from_json(&data_text).map_err(|e| e.to_string())?;
    let mat: RealMaterials =
        serde_json::from_str(&mat_text).map_err(|e| format!("materials: {}", e))?;
    let pair = ConductivityPair::new(mat.sigma, mat.c, mat.f).map_err(|e| e.to_string())?;

    let mut report = ReportBuilder::new(
        "analyze-real",
        vec![
            ("data", digest(&data_text)),
            ("materials", digest(&mat_text)),
        ],
        a.tolerance,
    );

    let classification = match first_breakdown_phase(&pair) {
        FirstBreakdown::Phase1First => "phase-1-first",
        FirstBreakdown::Phase2First => "phase-2-first",
        FirstBreakdown::Indeterminate => "indeterminate",
    };
    report.field("first-breakdown-phase", json!(classification));

    let m = MomentSet::from_dataset(&data).map_err(|e| e.to_string())?;
    report.field(
        "moments",
        json!({
            "avg-e": [m.avg_e.x, m.avg_e.y],
            "avg-j": [m.avg_j.x, m.avg_j.y],
            "avg-power": m.avg_power,
        }),
    );

    for v in criterion2_check(&m, &pair).map_err(|e| e.to_string())? {
        report.push_verdict(&v);
    }
    report.push_verdict(&criterion3_check(&m, &pair));

    if let Some(phases_path) = &a.phases {
        let text = read(phases_path)?;
        let labels: Vec<u8> = serde_json::from_str(&text).map_err(|e| format!("phases: {}", e))?;
        let verdicts =
            criterion1_surface_check(&data, &labels, &pair).map_err(|e| e.to_string())?;
        // Record only the worst surface sample to keep reports bounded.
        if let Some(worst) = verdicts.iter().min_by(|x, y| x.margin.total_cmp(&y.margin)) {
            report.push_verdict(worst);
            report.field("surface-samples-checked", json!(verdicts.len()));
        }
    }

    match (&a.perturbed, &a.dsigma) {
        (Some(pert_path), Some(dsigma_text)) => {
            let pert_text = read(pert_path)?;
            let pert = BoundaryDataset::from_json(&pert_text).map_err(|e| e.to_string())?;
            let dsigma = parse_pair_arg(dsigma_text, "--dsigma")?;
            let p_base = average_power(&data).map_err(|e| e.to_string())?;
            let p_pert = average_power(&pert).map_err(|e| e.to_string())?;
            let (energies, verdicts) =
                criterion4_perturbation(p_base, p_pert, data.area, dsigma, &pair)
                    .map_err(|e| e.to_string())?;
            report.field("phase-energies", json!(energies.integral_e_sq));
            for v in verdicts {
                report.push_verdict(&v);
            }
        }
        (None, None) => {}
        _ => return Err("--perturbed and --dsigma must be given together".into()),
    }

    report.finish(a.report.as_deref())
}

// ---------------------------------------------------------------------------
// analyze-two-bc

fn analyze_two_bc(a: AnalyzeTwoBc) -> Result<u8, String> {
    let t1 = read(&a.data1)?;
    let t2 = read(&a.data2)?;
    let mt = read(&a.materials)?;
    let d1 = BoundaryDataset::from_json(&t1).map_err(|e| e.to_string())?;
    let d2 = BoundaryDataset::from_json(&t2).map_err(|e| e.to_string())?;
    let mat: RealMaterials = serde_json::from_str(&mt).map_err(|e| format!("materials: {}", e))?;
    let pair = ConductivityPair::new(mat.sigma, mat.c, mat.f).map_err(|e| e.to_string())?;
    let weights = parse_pair_arg(&a.weights, "--weights")?;

    let mut report = ReportBuilder::new(
        "analyze-two-bc",
        vec![
            ("data1", digest(&t1)),
            ("data2", digest(&t2)),
            ("materials", digest(&mt)),
        ],
        a.tolerance,
    );

    let (m1, m2) = MomentSet::from_pair(&d1, &d2).map_err(|e| e.to_string())?;
    let inputs = TwoBcInputs::from_moments(&m1, &m2, &pair).map_err(|e| e.to_string())?;
    {
        // Region serializations for downstream tooling.
        let prism = fieldcert::twobc::compatible_prism(&pair, &inputs.powers, true)
            .map_err(|e| e.to_string())?;
        let feas =
            fieldcert::twobc::psd_feasible_region(&pair, &inputs).map_err(|e| e.to_string())?;
        report.field("compatible-region", serde_json::to_value(&prism).unwrap());
        report.field("feasible-region", serde_json::to_value(&feas).unwrap());
    }
    match breakdown_certificate_3d(&pair, &inputs) {
        Ok(cert) => {
            report.field(
                "splitting",
                json!({
                    "region": cert.region_outcome,
                    "checks": cert.checks,
                }),
            );
            report.push_verdict(&cert.verdict);
        }
        Err(Error::NumericalInconclusive) => report.mark_inconclusive(),
        Err(e) => return Err(e.to_string()),
    }
    match improved_certificate_2d(&m1, &m2, &pair, weights) {
        Ok(cert) => {
            report.field(
                "splitting-tightened",
                json!({
                    "region": cert.region_outcome,
                    "checks": cert.checks,
                }),
            );
            report.push_verdict(&cert.verdict);
        }
        Err(Error::EqualModuli) => {
            report.field(
                "splitting-tightened",
                json!("skipped: equal conductivity magnitudes"),
            );
        }
        Err(Error::NumericalInconclusive) => report.mark_inconclusive(),
        Err(e) => return Err(e.to_string()),
    }

    if let Some(plot) = &a.plot {
        // Slice the three-variable regions on the plane y1 = D12^(1)/f1.
        let y1 = inputs.d[0][0][1] / pair.f[0];
        let prism = fieldcert::twobc::compatible_prism(&pair, &inputs.powers, true)
            .map_err(|e| e.to_string())?;
        let feas =
            fieldcert::twobc::psd_feasible_region(&pair, &inputs).map_err(|e| e.to_string())?;
        let prism2 = region3_slice(&prism, y1);
        let feas2 = region3_slice(&feas, y1);
        let half = 1.5 * pair.c[0] * pair.c[0] * pair.f[0] + 0.5;
        let vp = Viewport {
            xmin: -0.2 * half,
            xmax: half,
            ymin: -0.2 * half,
            ymax: half,
            width: 640,
            height: 640,
        };
        let svg = render_svg(
            &[
                StyledRegion {
                    region: &feas2,
                    style: RegionStyle::Feasible,
                    label: "feasible".into(),
                },
                StyledRegion {
                    region: &prism2,
                    style: RegionStyle::Compatible,
                    label: "compatible".into(),
                },
            ],
            vp,
        )
        .map_err(|e| e.to_string())?;
        write_out(plot, &svg)?;
    }

    report.finish(a.report.as_deref())
}

/// Fix the middle coordinate of a three-variable region, producing the plane
/// region in the remaining two.
fn region3_slice(r: &Region3, y1: f64) -> Region2 {
    let mut out = Region2::full_plane();
    if r.lo[0].is_finite() {
        out.push(Constraint2::linear(-1.0, 0.0, -r.lo[0], "x lower"));
    }
    if r.hi[0].is_finite() {
        out.push(Constraint2::linear(1.0, 0.0, r.hi[0], "x upper"));
    }
    if r.lo[2].is_finite() {
        out.push(Constraint2::linear(0.0, -1.0, -r.lo[2], "z lower"));
    }
    if r.hi[2].is_finite() {
        out.push(Constraint2::linear(0.0, 1.0, r.hi[2], "z upper"));
    }
    for l in &r.linear {
        out.push(Constraint2::linear(
            l.a[0],
            l.a[2],
            l.c - l.a[1] * y1,
            &l.label,
        ));
    }
    for p in &r.psd {
        // [[a11(x), a12(y1)], [a12(y1), a22(z)]] PSD with y1 fixed:
        // a11 >= 0, a22 >= 0, a11 a22 - a12^2 >= 0.
        let a12 = p.a12.c0 + p.a12.cy * y1;
        out.push(Constraint2::linear(
            -p.a11.cx,
            0.0,
            p.a11.c0,
            &format!("{} (first diagonal)", p.label),
        ));
        out.push(Constraint2::linear(
            0.0,
            -p.a22.cz,
            p.a22.c0,
            &format!("{} (second diagonal)", p.label),
        ));
        let q = Quadratic::from_coeffs(
            0.0,
            p.a11.cx * p.a22.cz,
            0.0,
            p.a11.cx * p.a22.c0,
            p.a22.cz * p.a11.c0,
            p.a11.c0 * p.a22.c0 - a12 * a12,
        );
        out.push(Constraint2::quadratic(
            q,
            &format!("{} (determinant)", p.label),
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// analyze-complex

#[derive(Deserialize)]
struct ComplexMaterials {
    sigma: [[f64; 2]; 2],
    c: [f64; 2],
    f: [f64; 2],
    #[serde(default = "default_omega")]
    omega: f64,
}

fn default_omega() -> f64 {
    1.0
}

fn analyze_complex(a: AnalyzeComplex) -> Result<u8, String> {
    let t_re = read(&a.data_re)?;
    let t_im = read(&a.data_im)?;
    let mt = read(&a.materials)?;
    let d_re = BoundaryDataset::from_json(&t_re).map_err(|e| e.to_string())?;
    let d_im = BoundaryDataset::from_json(&t_im).map_err(|e| e.to_string())?;
    let mat: ComplexMaterials =
        serde_json::from_str(&mt).map_err(|e| format!("materials: {}", e))?;
    let pair = ComplexPair::new(
        [
            Complex64::new(mat.sigma[0][0], mat.sigma[0][1]),
            Complex64::new(mat.sigma[1][0], mat.sigma[1][1]),
        ],
        mat.c,
        mat.f,
        mat.omega,
    )
    .map_err(|e| e.to_string())?;

    let mut report = ReportBuilder::new(
        "analyze-complex",
        vec![
            ("data-re", digest(&t_re)),
            ("data-im", digest(&t_im)),
            ("materials", digest(&mt)),
        ],
        a.tolerance,
    );

    match certify_from_datasets(&d_re, &d_im, &pair, a.improved) {
        Ok((cert, compat, feas)) => {
            report.field("outcome", json!(cert.outcome));
            report.field("compatible-region", serde_json::to_value(&compat).unwrap());
            report.field("feasible-region", serde_json::to_value(&feas).unwrap());
            report.push_verdict(&cert.verdict);
            if let Some(plot) = &a.plot {
                let extent = plot_extent(&feas).max(1.0);
                let vp = Viewport {
                    xmin: -0.25 * extent,
                    xmax: extent,
                    ymin: -0.25 * extent,
                    ymax: extent,
                    width: 640,
                    height: 640,
                };
                let svg = render_svg(
                    &[
                        StyledRegion {
                            region: &feas,
                            style: RegionStyle::Feasible,
                            label: "feasible".into(),
                        },
                        StyledRegion {
                            region: &compat,
                            style: RegionStyle::Compatible,
                            label: "compatible".into(),
                        },
                    ],
                    vp,
                )
                .map_err(|e| e.to_string())?;
                write_out(plot, &svg)?;
            }
        }
        Err(Error::NumericalInconclusive) => report.mark_inconclusive(),
        Err(e) => return Err(e.to_string()),
    }

    report.finish(a.report.as_deref())
}

/// Rough spatial extent of a plane region's quadratic constraints.
fn plot_extent(r: &Region2) -> f64 {
    let mut e: f64 = 1.0;
    for c in &r.constraints {
        if let fieldcert::geometry::ConstraintForm2::Quadratic { m } = &c.form {
            if let Some(center) = m.center() {
                e = e.max(2.0 * center.norm() + 1.0);
                let k = m.eval(center);
                let (lo, hi) = m.quad_part().sym_eigenvalues();
                for lam in [lo, hi] {
                    if lam.abs() > 1e-12 && -k / lam > 0.0 {
                        e = e.max(center.norm() + 1.5 * (-k / lam).sqrt());
                    }
                }
            }
        }
    }
    e
}

// ---------------------------------------------------------------------------
// analyze-elastic

#[derive(Deserialize)]
struct ElasticMaterials {
    kappa: [f64; 2],
    mu: [f64; 2],
    #[serde(default)]
    lambda: Option<[f64; 2]>,
    f: [f64; 2],
    k: [f64; 2],
}

#[derive(Deserialize)]
struct ViscoelasticInput {
    delta_e: [f64; 2],
    dkappa: [[f64; 2]; 2],
    dmu: [[f64; 2]; 2],
}

fn analyze_elastic(a: AnalyzeElastic) -> Result<u8, String> {
    let dt = read(&a.data)?;
    let mt = read(&a.materials)?;
    let data = BoundaryDataset::from_json(&dt).map_err(|e| e.to_string())?;
    let mat: ElasticMaterials =
        serde_json::from_str(&mt).map_err(|e| format!("materials: {}", e))?;
    let pair =
        ElasticPair::new(mat.kappa, mat.mu, mat.lambda, mat.f, mat.k).map_err(|e| e.to_string())?;

    let mut report = ReportBuilder::new(
        "analyze-elastic",
        vec![("data", digest(&dt)), ("materials", digest(&mt))],
        a.tolerance,
    );

    let moments = elastic_moments(&data).map_err(|e| e.to_string())?;
    let meas = ElasticMeasurements::from(&moments);
    report.field(
        "moments",
        json!({
            "energy": meas.energy,
            "det-stress": meas.det_stress,
            "det-gradu": moments.det_gradu,
            "c-value": meas.c_value,
        }),
    );

    match yield_certificate(&meas, &pair) {
        Ok(cert) => {
            report.field("phase-margins", json!(cert.phase_margins));
            report.field("outcome", json!(cert.outcome));
            if let Ok(anchors) =
                fieldcert::elastic::lower_bound_anchors(meas.avg_stress, meas.avg_gradu, &pair)
            {
                let feas = fieldcert::elastic::feasible_region_e1(&meas, anchors, &pair);
                report.field("feasible-region", serde_json::to_value(&feas).unwrap());
            }
            report.push_verdict(&cert.verdict);
        }
        Err(Error::NumericalInconclusive) => report.mark_inconclusive(),
        Err(e) => return Err(e.to_string()),
    }

    if let Some(vpath) = &a.viscoelastic {
        let vt = read(vpath)?;
        let vin: ViscoelasticInput =
            serde_json::from_str(&vt).map_err(|e| format!("viscoelastic: {}", e))?;
        let split = viscoelastic_solve(
            meas.energy,
            meas.det_stress,
            Complex64::new(vin.delta_e[0], vin.delta_e[1]),
            [
                Complex64::new(vin.dkappa[0][0], vin.dkappa[0][1]),
                Complex64::new(vin.dkappa[1][0], vin.dkappa[1][1]),
            ],
            [
                Complex64::new(vin.dmu[0][0], vin.dmu[0][1]),
                Complex64::new(vin.dmu[1][0], vin.dmu[1][1]),
            ],
            &pair,
        )
        .map_err(|e| e.to_string())?;
        report.field(
            "energy-split",
            json!({
                "e1b": split.e1b, "e1s": split.e1s, "e2b": split.e2b, "e2s": split.e2s,
            }),
        );
        for v in split_point_verdicts(&split, &pair) {
            report.push_verdict(&v);
        }
    }

    if let Some(plot) = &a.plot {
        let anchors =
            fieldcert::elastic::lower_bound_anchors(meas.avg_stress, meas.avg_gradu, &pair)
                .map_err(|e| e.to_string())?;
        let feas = fieldcert::elastic::feasible_region_e1(&meas, anchors, &pair);
        let cut = 2.0 * pair.mu[0] * pair.f[0] * pair.k[0];
        let compat = Region2::new(vec![Constraint2::linear(
            0.0,
            1.0,
            cut,
            "yield compatibility",
        )]);
        let half = (meas.energy.abs() + cut).max(1.0) * 1.2;
        let vp = Viewport {
            xmin: -0.1 * half,
            xmax: half,
            ymin: -0.1 * half,
            ymax: half,
            width: 640,
            height: 640,
        };
        let svg = render_svg(
            &[
                StyledRegion {
                    region: &feas,
                    style: RegionStyle::Feasible,
                    label: "feasible".into(),
                },
                StyledRegion {
                    region: &compat,
                    style: RegionStyle::Compatible,
                    label: "compatible".into(),
                },
            ],
            vp,
        )
        .map_err(|e| e.to_string())?;
        write_out(plot, &svg)?;
    }

    report.finish(a.report.as_deref())
}

// ---------------------------------------------------------------------------
// eomega

fn eomega(cmd: EomegaCmd) -> Result<u8, String> {
    match cmd {
        EomegaCmd::Generate {
            generator,
            samples,
            out_csv,
            out_svg,
        } => {
            let gen =
                RationalGenerator::from_json(&read(&generator)?).map_err(|e| e.to_string())?;
            let curve = boundary_curve(&gen, samples).map_err(|e| e.to_string())?;
            write_out(&out_csv, &curve.to_csv())?;
            if let Some(svg_path) = out_svg {
                let report = validate(&gen, ValidateOptions::default());
                let svg = atlas_svg(&[&curve], &[Some(&report)])?;
                write_out(&svg_path, &svg)?;
            }
            Ok(EXIT_SAFE)
        }
        EomegaCmd::Validate { generator, report } => {
            let gen =
                RationalGenerator::from_json(&read(&generator)?).map_err(|e| e.to_string())?;
            let r = validate(&gen, ValidateOptions::default());
            let text = serde_json::to_string_pretty(&r).expect("report serializes");
            println!("{}", text);
            if let Some(p) = report {
                write_out(&p, &text)?;
            }
            Ok(EXIT_SAFE)
        }
        EomegaCmd::Transform {
            generator,
            gamma1,
            gamma2_re,
            out,
            out_csv,
        } => {
            let gen =
                RationalGenerator::from_json(&read(&generator)?).map_err(|e| e.to_string())?;
            let transformed =
                transform_generator(&gen, gamma1, gamma2_re).map_err(|e| e.to_string())?;
            write_out(&out, &transformed.to_json())?;
            if let Some(csv) = out_csv {
                let curve = boundary_curve(&transformed, 1024).map_err(|e| e.to_string())?;
                write_out(&csv, &curve.to_csv())?;
            }
            Ok(EXIT_SAFE)
        }
        EomegaCmd::Atlas {
            n,
            seed,
            max_poles,
            out_dir,
        } => {
            let shapes = random_atlas(n, seed, max_poles);
            if shapes.len() < n {
                return Err(format!(
                    "atlas sampling produced only {} of {} shapes",
                    shapes.len(),
                    n
                ));
            }
            fs::create_dir_all(&out_dir).map_err(|e| format!("{}: {}", out_dir.display(), e))?;
            let mut curves = vec![];
            for (i, (gen, report)) in shapes.iter().enumerate() {
                write_out(
                    &out_dir.join(format!("generator-{:02}.json", i)),
                    &gen.to_json(),
                )?;
                let curve = boundary_curve(gen, 1024).map_err(|e| e.to_string())?;
                write_out(
                    &out_dir.join(format!("curve-{:02}.csv", i)),
                    &curve.to_csv(),
                )?;
                write_out(
                    &out_dir.join(format!("validity-{:02}.json", i)),
                    &serde_json::to_string_pretty(report).expect("report serializes"),
                )?;
                curves.push(curve);
            }
            let refs: Vec<&fieldcert::eomega::InclusionCurve> = curves.iter().collect();
            let report_refs: Vec<Option<&fieldcert::eomega::ValidityReport>> =
                shapes.iter().map(|(_, r)| Some(r)).collect();
            write_out(&out_dir.join("atlas.svg"), &atlas_svg(&refs, &report_refs)?)?;
            println!(
                "wrote {} validated shapes to {}",
                shapes.len(),
                out_dir.display()
            );
            Ok(EXIT_SAFE)
        }
        EomegaCmd::Synthesize {
            generator,
            sigma1,
            radius,
            samples,
            out,
            out_materials,
        } => {
            let gen =
                RationalGenerator::from_json(&read(&generator)?).map_err(|e| e.to_string())?;
            let ring = RingGeometry::circle(Vec2::ZERO, radius, samples);
            let (ds, f1) = synthesize_boundary_dataset(&gen, sigma1, &ring, "inclusion-sharpness")
                .map_err(|e| e.to_string())?;
            write_out(
                &out,
                &serde_json::to_string(&ds).expect("dataset serializes"),
            )?;
            if let Some(mp) = out_materials {
                let mat = json!({
                    "sigma": [sigma1, 1.0],
                    "c": [1.0, 1.0 + sigma1.max(1.0)],
                    "f": [f1, 1.0 - f1],
                });
                write_out(&mp, &serde_json::to_string_pretty(&mat).unwrap())?;
            }
            println!("inclusion fraction f1 = {:.9}", f1);
            Ok(EXIT_SAFE)
        }
    }
}

/// Deterministic atlas sheet: solid inclusion outlines, a dashed candidate
/// body boundary, and markers at the critical images the body must exclude.
fn atlas_svg(
    curves: &[&fieldcert::eomega::InclusionCurve],
    reports: &[Option<&fieldcert::eomega::ValidityReport>],
) -> Result<String, String> {
    use std::fmt::Write as _;
    let cols = (curves.len() as f64).sqrt().ceil() as usize;
    let cols = cols.max(1);
    let cell = 200.0;
    let rows = curves.len().div_ceil(cols);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}">"#,
        cols as f64 * cell,
        rows as f64 * cell
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, curve) in curves.iter().enumerate() {
        let cx = (i % cols) as f64 * cell + cell / 2.0;
        let cy = (i / cols) as f64 * cell + cell / 2.0;
        let report = reports.get(i).copied().flatten();
        // Extent covers the curve and all critical images.
        let mut span = curve
            .x_plus
            .iter()
            .chain(&curve.x_minus)
            .fold(2.0f64, |m, &x| m.max(x.abs()));
        if let Some(r) = report {
            for cp in &r.critical_points {
                span = span.max(cp.z[0].abs()).max(cp.z[1].abs());
            }
        }
        let scale = 0.4 * cell / span.max(1.0) / 1.15;
        let poly = curve.polygon();
        let mut pts = String::new();
        for p in &poly {
            let _ = write!(pts, "{:.3},{:.3} ", cx + p.x * scale, cy - p.y * scale);
        }
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#2255aa" stroke-width="1.5"/>"##,
            pts.trim_end()
        );
        // Candidate body boundary: a dashed circle between the inclusion and
        // the nearest critical image (or 15% beyond the inclusion).
        let curve_r = poly.iter().fold(0.0f64, |m, p| m.max(p.norm()));
        let mut body_r = 1.15 * curve_r;
        if let Some(r) = report {
            for cp in &r.critical_points {
                let d = (cp.z[0] * cp.z[0] + cp.z[1] * cp.z[1]).sqrt();
                if d > curve_r {
                    body_r = body_r.min(0.5 * (curve_r + d));
                }
            }
        }
        let _ = writeln!(
            out,
            r##"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#cc3333" stroke-width="1" stroke-dasharray="5 4"/>"##,
            cx,
            cy,
            body_r * scale
        );
        if let Some(r) = report {
            for cp in &r.critical_points {
                let _ = writeln!(
                    out,
                    r##"<circle cx="{:.3}" cy="{:.3}" r="3" fill="none" stroke="#111111" stroke-width="1.2"/>"##,
                    cx + cp.z[0] * scale,
                    cy - cp.z[1] * scale
                );
            }
        }
    }
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

// ---------------------------------------------------------------------------
// synthesize

fn synthesize(s: Synthesize) -> Result<u8, String> {
    let text = read(&s.grid)?;
    let grid = if text.trim_start().starts_with('{') {
        serde_json::from_str::<PhaseGrid>(&text).map_err(|e| format!("grid: {}", e))?
    } else {
        let h = if s.cell > 0.0 {
            s.cell
        } else {
            let rows = text.lines().filter(|l| !l.trim().is_empty()).count().max(1);
            1.0 / rows as f64
        };
        PhaseGrid::from_mask(&text, h).map_err(|e| e.to_string())?
    };
    let sigma = parse_pair_arg(&s.sigma, "--sigma")?;

    let bc: Box<dyn Fn(f64, f64) -> f64> = if let Some(rest) = s.bc.strip_prefix("linear:") {
        let dir = parse_pair_arg(rest, "--bc linear")?;
        Box::new(move |x, y| -(dir[0] * x + dir[1] * y))
    } else if let Some(rest) = s.bc.strip_prefix("laminate-series:") {
        let f1 = rest
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("--bc laminate-series: {}", e))?;
        let width = grid.width();
        Box::new(fieldcert::solver::laminate_series_bc(sigma, f1, width))
    } else {
        return Err(format!("unknown boundary condition '{}'", s.bc));
    };

    let sol = solve(&grid, sigma, bc.as_ref()).map_err(|e| e.to_string())?;
    let (ds, phases) =
        extract_boundary_dataset(&grid, sigma, &sol, bc.as_ref(), |v| v, "synthesized");
    write_out(
        &s.out,
        &serde_json::to_string(&ds).expect("dataset serializes"),
    )?;
    if let Some(pp) = &s.out_phases {
        write_out(pp, &serde_json::to_string(&phases).unwrap())?;
    }
    if let Some(fp) = &s.out_fields {
        write_out(fp, &fieldcert::solver::solution_to_csv(&grid, &sol))?;
    }
    if let Some(op) = &s.oracle {
        let (e, j) = real_fields(&sol);
        let st = interior_stats(&grid, &[e], &[j]);
        let sidecar = json!({
            "fractions": st.fractions,
            "max-e": st.max_e,
            "max-e-interior": st.max_e_interior,
            "max-e-boundary": st.max_e_boundary,
            "power": st.power[0][0],
            "avg-chi-e": [
                [st.avg_chi_e[0][0].x, st.avg_chi_e[0][0].y],
                [st.avg_chi_e[1][0].x, st.avg_chi_e[1][0].y],
            ],
            "residual": sol.residual,
        });
        write_out(op, &serde_json::to_string_pretty(&sidecar).unwrap())?;
    }
    println!("wrote dataset with {} samples", ds.samples.len());
    Ok(EXIT_SAFE)
}
