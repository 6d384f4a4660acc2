use std::path::{Path, PathBuf};

use pinchlab::glued::{build_mesh, lambda1_upper_bound_via_test_function, FamilyParams};
use pinchlab::report::report_columns;
use pinchlab::rigidity::RadialCurvatureProfile;
use pinchlab::{
    analyze, assemble_report, generate_icosphere, generate_revolution, integrate_riccati, perturb_radially,
    random_admissible, read_mesh_file, report_json, rigidity_certificate, write_columns_csv, write_obj, write_off,
    write_vertex_fields_csv, AmbientModel, PinchOptions, PinchReport, SurfaceMesh, Wave,
};
use rayon::prelude::*;

use crate::config::{
    list_or, AnalyzeArgs, AnalyzeSection, Axis, Common, ExampleArgs, ExampleName, Family, GenerateArgs,
    GenerateSection, RigidityArgs, RigiditySection, SweepArgs, SweepSection,
};
use crate::output::{emit, write_atomic, Failure};

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn model(c: &Common) -> Result<AmbientModel, Failure> {
    AmbientModel::new(c.delta, 3).map_err(usage)
}

fn parse_wave(s: Option<&str>, seed: u64) -> Result<Wave, Failure> {
    match s {
        None | Some("random") => Ok(Wave::Random(seed)),
        Some(w) => match w.strip_prefix("zonal:").map(str::parse::<u32>) {
            Some(Ok(l)) => Ok(Wave::Zonal(l)),
            _ => Err(usage(format!("unknown wave {w:?}; use random or zonal:<degree>"))),
        },
    }
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure::Io(e.to_string())
}

fn core_failure(e: pinchlab::Error) -> Failure {
    Failure::from(e)
}

pub fn generate(c: &Common, a: &GenerateArgs, f: &GenerateSection) -> Result<(), Failure> {
    let family = a
        .family
        .or(f.family)
        .ok_or_else(|| usage("generate needs a family: icosphere, perturbed, glued or revolution"))?;
    let model = model(c)?;
    let radius = a.radius.or(f.radius).unwrap_or(1.0);
    let subdiv = a.subdiv.or(f.subdiv).unwrap_or(4);
    let nr = a.nr.or(f.nr);
    let ntheta = a.ntheta.or(f.ntheta);
    let mesh = match family {
        Family::Icosphere => generate_icosphere(&model, &model.origin(), radius, subdiv).map_err(usage)?,
        Family::Perturbed => {
            let base = generate_icosphere(&model, &model.origin(), radius, subdiv).map_err(usage)?;
            let wave = parse_wave(a.wave.as_deref().or(f.wave.as_deref()), c.seed)?;
            perturb_radially(&base, a.amplitude.or(f.amplitude).unwrap_or(0.1), wave).map_err(usage)?
        }
        Family::Glued => {
            if c.delta != 0.0 {
                return Err(usage("the glued family lives in flat space; drop --ambient-delta"));
            }
            let mut p = FamilyParams::new(a.eps.or(f.eps).unwrap_or(0.1))
                .with_resolution(nr.unwrap_or(128), ntheta.unwrap_or(128));
            p.p = a.spheres.or(f.spheres).unwrap_or(2) as u32;
            build_mesh(&p).map_err(usage)?.mesh
        }
        Family::Revolution => {
            let eq = a.equatorial.or(f.equatorial).unwrap_or(1.0);
            let polar = a.polar.or(f.polar).unwrap_or(1.0);
            let rings = nr.unwrap_or(64);
            if !(eq > 0.0 && polar > 0.0) || rings < 2 {
                return Err(usage("spheroid needs positive semi-axes and at least two rings"));
            }
            let curve: Vec<[f64; 2]> = (0..=rings)
                .map(|i| {
                    let t = std::f64::consts::PI * i as f64 / rings as f64;
                    let r = if i == 0 || i == rings { 0.0 } else { eq * t.sin() };
                    [r, -polar * t.cos()]
                })
                .collect();
            generate_revolution(&model, &curve, ntheta.unwrap_or(64)).map_err(usage)?
        }
    };
    let obj = c.out.as_deref().and_then(|p| p.extension()).is_some_and(|e| e.eq_ignore_ascii_case("obj"));
    emit(c.out.as_deref(), |w| {
        if obj {
            write_obj(&mesh, w).map_err(core_failure)
        } else {
            write_off(&mesh, w).map_err(core_failure)
        }
    })?;
    let summary = format!(
        "vertices {} edges {} faces {} euler {} area {:.6} min_quality {:.4}",
        mesh.n_vertices(),
        mesh.edges().len(),
        mesh.n_faces(),
        mesh.euler_characteristic(),
        mesh.total_area(),
        mesh.min_face_quality()
    );
    if c.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn load_mesh(path: &Path, delta: Option<f64>) -> Result<SurfaceMesh, Failure> {
    let raw = read_mesh_file(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    raw.into_mesh(delta).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

pub fn analyze_cmd(
    c: &Common,
    explicit_delta: Option<f64>,
    a: &AnalyzeArgs,
    f: &AnalyzeSection,
) -> Result<(), Failure> {
    let path = c.mesh.as_deref().ok_or_else(|| usage("analyze needs --mesh"))?;
    let mesh = load_mesh(path, explicit_delta)?;
    let defaults = PinchOptions::default();
    let opts = PinchOptions {
        eig_tol: c.tol,
        slack: a.slack.or(f.slack).unwrap_or(defaults.slack),
        area_bound: a.area_bound.or(f.area_bound),
        ..defaults
    };
    let result = analyze(&mesh, &opts)?;
    let json = report_json(&result.report)?;
    emit(c.out.as_deref(), |w| w.write_all(json.as_bytes()).map_err(|e| Failure::Io(e.to_string())))?;
    if let Some(fields) = a.fields.as_deref().or(f.fields.as_deref()) {
        write_atomic(fields, |w| write_vertex_fields_csv(w, &result.fields).map_err(core_failure))?;
    }
    Ok(())
}

enum ProfileSpec {
    Explicit(String, RadialCurvatureProfile),
    Random(usize),
}

fn parse_profile(s: &str) -> Result<ProfileSpec, Failure> {
    let mut parts = s.split(':');
    let kind = parts.next().unwrap_or_default();
    let rest: Vec<&str> = parts.collect();
    if kind == "random" {
        return match rest.as_slice() {
            [n] => n.parse().map(ProfileSpec::Random).map_err(|e| usage(format!("{s}: {e}"))),
            _ => Err(usage(format!("{s}: use random:<count>"))),
        };
    }
    let nums = rest
        .iter()
        .map(|x| x.parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| usage(format!("{s}: {e}")))?;
    let p = match (kind, nums.as_slice()) {
        ("constant", [k, r]) => RadialCurvatureProfile::constant(*k, *r),
        ("linear", [mu, d, r]) => RadialCurvatureProfile::linear(*mu, *d, *r),
        ("bump", [mu, d, r, center, width, depth]) => RadialCurvatureProfile::bump(*mu, *d, *r, *center, *width, *depth),
        _ => {
            return Err(usage(format!(
                "{s}: expected constant:K:R, linear:MU:DELTA:R, bump:MU:DELTA:R:CENTER:WIDTH:DEPTH or random:N"
            )))
        }
    }
    .map_err(|e| usage(format!("{s}: {e}")))?;
    Ok(ProfileSpec::Explicit(s.to_string(), p))
}

/// Label and `(t, rho, J, F_aux, s_delta, ratio)` rows of one profile.
type SolutionTable = (String, Vec<[f64; 6]>);

struct RigidityRow {
    profile: String,
    eps: f64,
    outcome: Result<pinchlab::Certificate, String>,
}

fn failure_text(e: &pinchlab::Error) -> String {
    match e {
        pinchlab::Error::FocalPoint(t) => format!("focal failure at t = {t}"),
        pinchlab::Error::Hypothesis(m) => format!("hypothesis violated: {m}"),
        other => other.to_string(),
    }
}

pub fn rigidity(c: &Common, a: &RigidityArgs, f: &RigiditySection) -> Result<(), Failure> {
    let mut specs = list_or(&a.profiles, &f.profiles);
    if specs.is_empty() {
        specs = ["constant:0:1", "constant:1:1", "constant:-1:1", "linear:-1:0:1"].map(String::from).to_vec();
    }
    let mut eps = list_or(&a.eps, &f.eps);
    if eps.is_empty() {
        eps = vec![0.0, 1e-4, 1e-2];
    }
    let steps = a.steps.or(f.steps).unwrap_or(10_000);
    if steps < 1000 {
        return Err(usage("--steps must be at least 1000"));
    }
    let parsed = specs.iter().map(|s| parse_profile(s)).collect::<Result<Vec<_>, _>>()?;
    let seed = c.seed;
    let groups: Vec<(Vec<RigidityRow>, Option<SolutionTable>)> = parsed
        .par_iter()
        .map(|spec| match spec {
            ProfileSpec::Explicit(label, p) => match integrate_riccati(p, p.radius / steps as f64) {
                Ok(sol) => {
                    let rows = eps
                        .iter()
                        .map(|&e| RigidityRow {
                            profile: label.clone(),
                            eps: e,
                            outcome: rigidity_certificate(&sol, e).map_err(|err| failure_text(&err)),
                        })
                        .collect();
                    (rows, Some((label.clone(), sol.rows())))
                }
                Err(err) => {
                    let text = failure_text(&err);
                    let rows = eps
                        .iter()
                        .map(|&e| RigidityRow { profile: label.clone(), eps: e, outcome: Err(text.clone()) })
                        .collect();
                    (rows, None)
                }
            },
            ProfileSpec::Random(n) => {
                let rows = (0..*n as u64)
                    .into_par_iter()
                    .map(|i| match random_admissible(seed, i) {
                        Ok((p, s, e)) => RigidityRow {
                            profile: p.label(),
                            eps: e,
                            outcome: rigidity_certificate(&s, e).map_err(|err| failure_text(&err)),
                        },
                        Err(err) => RigidityRow { profile: format!("random#{i}"), eps: f64::NAN, outcome: Err(failure_text(&err)) },
                    })
                    .collect();
                (rows, None)
            }
        })
        .collect();

    emit(c.out.as_deref(), |w| {
        let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w);
        wr.write_record(["profile", "eps", "boundary_defect", "max_ratio", "bound", "f_monotone", "status"])
            .map_err(csv_failure)?;
        for row in groups.iter().flat_map(|g| &g.0) {
            let rec = match &row.outcome {
                Ok(cert) => [
                    row.profile.clone(),
                    row.eps.to_string(),
                    cert.boundary_defect.to_string(),
                    cert.max_ratio.to_string(),
                    cert.bound.to_string(),
                    cert.f_monotone.to_string(),
                    if cert.ok { "ok".into() } else { "bound violated".into() },
                ],
                Err(msg) => [row.profile.clone(), row.eps.to_string(), String::new(), String::new(), String::new(), String::new(), msg.clone()],
            };
            wr.write_record(&rec).map_err(csv_failure)?;
        }
        wr.flush().map_err(|e| Failure::Io(e.to_string()))
    })?;

    if let Some(dir) = a.solutions.as_deref().or(f.solutions.as_deref()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        for (k, (_, sol)) in groups.iter().filter_map(|g| g.1.as_ref()).enumerate() {
            let cols: Vec<Vec<f64>> = (0..6).map(|j| sol.iter().map(|r| r[j]).collect()).collect();
            let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
            write_atomic(&dir.join(format!("profile_{k}.csv")), |w| {
                write_columns_csv(w, &["t", "rho", "J", "F_aux", "s_delta", "ratio"], &refs).map_err(core_failure)
            })?;
        }
    }
    Ok(())
}

/// Columns that get a companion `x,y` plot file.
const TREND_COLUMNS: [&str; 6] = ["eps_spec", "hausdorff", "psi_infty", "Xtan_l2sq", "laplace_dev", "lambda1"];

struct SweepRow {
    x: f64,
    extra: Option<f64>,
    report: Result<PinchReport, String>,
}

pub fn sweep(c: &Common, a: &SweepArgs, f: &SweepSection) -> Result<(), Failure> {
    let axis = a.axis.or(f.axis).ok_or_else(|| usage("sweep needs --axis amplitude or --axis eps"))?;
    let values = list_or(&a.values, &f.values);
    if values.is_empty() {
        return Err(usage("sweep needs a non-empty --values list"));
    }
    let opts = PinchOptions { eig_tol: c.tol, ..PinchOptions::default() };
    let rows: Vec<SweepRow> = match axis {
        Axis::Amplitude => {
            let model = model(c)?;
            let radius = a.radius.or(f.radius).unwrap_or(1.0);
            let subdiv = a.subdiv.or(f.subdiv).unwrap_or(5);
            let base = generate_icosphere(&model, &model.origin(), radius, subdiv).map_err(usage)?;
            let wave = parse_wave(a.wave.as_deref().or(f.wave.as_deref()), c.seed)?;
            values
                .par_iter()
                .map(|&amp| SweepRow {
                    x: amp,
                    extra: None,
                    report: perturb_radially(&base, amp, wave)
                        .and_then(|m| assemble_report(&m, &opts))
                        .map_err(|e| e.to_string()),
                })
                .collect()
        }
        Axis::Eps => {
            if c.delta != 0.0 {
                return Err(usage("the glued family lives in flat space; drop --ambient-delta"));
            }
            let nr = a.nr.or(f.nr).unwrap_or(128);
            let nt = a.ntheta.or(f.ntheta).unwrap_or(128);
            values
                .par_iter()
                .map(|&eps| {
                    let built = build_mesh(&FamilyParams::new(eps).with_resolution(nr, nt));
                    match built {
                        Ok(g) => SweepRow {
                            x: eps,
                            extra: lambda1_upper_bound_via_test_function(&g).ok(),
                            report: assemble_report(&g.mesh, &opts).map_err(|e| e.to_string()),
                        },
                        Err(e) => SweepRow { x: eps, extra: None, report: Err(e.to_string()) },
                    }
                })
                .collect()
        }
    };
    let (xname, extra_name) = match axis {
        Axis::Amplitude => ("amplitude", None),
        Axis::Eps => ("eps", Some("courtois_quotient")),
    };

    let columns: Vec<Vec<(String, String)>> = rows
        .iter()
        .map(|r| r.report.as_ref().map(report_columns).unwrap_or(Ok(Vec::new())))
        .collect::<Result<_, _>>()?;
    let header: Vec<String> = columns.iter().find(|c| !c.is_empty()).map(|c| c.iter().map(|p| p.0.clone()).collect()).unwrap_or_default();
    for r in &rows {
        if let Err(e) = &r.report {
            eprintln!("row {xname} = {}: {e}", r.x);
        }
    }
    emit(c.out.as_deref(), |w| {
        let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).flexible(false).from_writer(w);
        let mut head = vec![xname.to_string(), "status".to_string()];
        head.extend(extra_name.map(String::from));
        head.extend(header.iter().cloned());
        wr.write_record(&head).map_err(csv_failure)?;
        for (r, cols) in rows.iter().zip(&columns) {
            let mut rec = vec![r.x.to_string()];
            rec.push(match &r.report {
                Ok(_) => "ok".to_string(),
                Err(e) => e.clone(),
            });
            if extra_name.is_some() {
                rec.push(r.extra.map(|v| v.to_string()).unwrap_or_default());
            }
            if cols.is_empty() {
                rec.extend(std::iter::repeat_n(String::new(), header.len()));
            } else {
                rec.extend(cols.iter().map(|p| p.1.clone()));
            }
            wr.write_record(&rec).map_err(csv_failure)?;
        }
        wr.flush().map_err(|e| Failure::Io(e.to_string()))
    })?;

    if let Some(out) = c.out.as_deref() {
        for col in TREND_COLUMNS {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter_map(|r| r.report.as_ref().ok().map(|rep| (r.x, trend_value(rep, col))))
                .unzip();
            write_atomic(&plot_path(out, col), |w| write_columns_csv(w, &["x", "y"], &[&xs, &ys]).map_err(core_failure))?;
        }
    }
    Ok(())
}

fn trend_value(r: &PinchReport, col: &str) -> f64 {
    match col {
        "eps_spec" => r.eps_spec,
        "hausdorff" => r.hausdorff,
        "psi_infty" => r.psi_infty,
        "Xtan_l2sq" => r.xtan_l2sq,
        "laplace_dev" => r.laplace_dev,
        "lambda1" => r.lambda1,
        _ => unreachable!("unknown trend column {col}"),
    }
}

/// `sweep.csv` → `sweep.eps_spec.csv` next to it.
pub fn plot_path(out: &Path, col: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    out.with_file_name(format!("{stem}.{col}.csv"))
}

pub fn example(c: &Common, a: &ExampleArgs) -> Result<(), Failure> {
    let opts = PinchOptions { eig_tol: c.tol, ..PinchOptions::default() };
    let mesh = match a.name.unwrap_or_default() {
        ExampleName::Sphere | ExampleName::Perturbed => {
            let model = model(c)?;
            let radius = if c.delta > 0.0 { std::f64::consts::FRAC_PI_8 / c.delta.sqrt() } else { 1.0 };
            let m = generate_icosphere(&model, &model.origin(), radius, 4).map_err(usage)?;
            if a.name == Some(ExampleName::Perturbed) {
                perturb_radially(&m, 0.05 * radius, Wave::Random(c.seed)).map_err(usage)?
            } else {
                m
            }
        }
        ExampleName::Glued => {
            if c.delta != 0.0 {
                return Err(usage("the glued family lives in flat space; drop --ambient-delta"));
            }
            build_mesh(&FamilyParams::new(0.1).with_resolution(64, 64)).map_err(usage)?.mesh
        }
    };
    let r = assemble_report(&mesh, &opts)?;
    eprintln!(
        "lambda1 {:.6}  h_infty {:.6}  eps_spec {:+.4e}  R0 {:.6}  hausdorff {:.3e}  flags {:?}",
        r.lambda1, r.h_infty, r.eps_spec, r.r0, r.hausdorff, r.flags
    );
    let json = report_json(&r)?;
    emit(c.out.as_deref(), |w| w.write_all(json.as_bytes()).map_err(|e| Failure::Io(e.to_string())))
}
