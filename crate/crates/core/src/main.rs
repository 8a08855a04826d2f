use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cutlocus::boxcount::{box_counting_dimension, geometric_scales};
use cutlocus::bumps::BumpH;
use cutlocus::cutlocus::{overlay_svg, verify_with_medial, CutLocusTolerances, TreeGeometry};
use cutlocus::export::{sig17, write_text};
use cutlocus::hull::{assemble_boundary, assemble_demo, dilate};
use cutlocus::randers::randers_report;
use cutlocus::selfsim::{analytic_dimension, canonical_n, check_open_set_condition, mandala_sample, mandala_system, moran_dimension};
use cutlocus::sequences::{alpha_seq, l_seq, r_seq, t_seq, total_tree_length, TreeLength};
use cutlocus::smoothing::{verify_profile, SeamGeometry, SmoothedProfile};
use cutlocus::suite::{run_all, SuiteConfig};
use cutlocus::tree::{build_tree, verify_sphere_invariant};
use cutlocus::zeta::differentiability_probe;
use cutlocus::{ConstructionParams, Error};

#[derive(Parser, Debug)]
#[command(name = "cutlocus", version, about = "Fractal cut-locus constructions and their numerical checks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Differentiability order.
    #[arg(long, global = true, default_value_t = 3)]
    k: u32,
    /// Ambient dimension; defaults to (3^(k-1) + 3) / 2.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Base branching angle in radians.
    #[arg(long, global = true, default_value_t = std::f64::consts::FRAC_PI_4)]
    phi: f64,
    #[arg(long, global = true, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Medial-axis grid resolution per axis.
    #[arg(long, global = true, default_value_t = 512)]
    grid: usize,
    /// Directory for artifacts; nothing is written without it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Artifact formats to write (default: all the command produces).
    #[arg(long, global = true, value_delimiter = ',')]
    format: Vec<Format>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Relative truncation tolerance of the series.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol_tail: f64,
    /// Hausdorff tolerance in grid cells.
    #[arg(long, global = true, default_value_t = 2.0)]
    tol_hausdorff: f64,
    /// Ray spread tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_concentration: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Format {
    Csv,
    Json,
    Svg,
    Obj,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Show {
    T,
    L,
    R,
    Alpha,
    All,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tables of t_i, l_i, r_i, alpha_i.
    Sequences {
        #[arg(long, value_enum, default_value_t = Show::All)]
        show: Show,
        #[arg(long, default_value_t = 10)]
        count: u32,
    },
    /// Finite tree approximation and its sphere invariant.
    Tree {
        /// Coordinate plane for the SVG projection, 0-based.
        #[arg(long, value_delimiter = ',', default_values_t = [0usize, 1])]
        plane: Vec<usize>,
    },
    /// Dimension of the endpoint set.
    Dim {
        /// Also estimate by box counting on the depth-m mandala sample.
        #[arg(long)]
        boxcount: bool,
    },
    /// Assemble the boundary hypersurface.
    Hull {
        /// Use the two-sphere demo geometry in dimension --n (default 3).
        #[arg(long)]
        demo: bool,
        /// Mesh resolution for OBJ export.
        #[arg(long, default_value_t = 48)]
        mesh: usize,
    },
    /// Check that the inward cut locus is the tree.
    Cutlocus {
        /// Use the planar two-sphere demo geometry.
        #[arg(long)]
        demo: bool,
        /// Dilate the boundary by --epsilon first.
        #[arg(long)]
        dilate: bool,
    },
    /// Seam smoothing profile and the differentiability probe.
    Smooth {
        /// Use the demo seam instead of the series seam.
        #[arg(long)]
        demo: bool,
        /// Position of y_b inside the admissible interval, from the top.
        #[arg(long, default_value_t = 0.5)]
        fraction: f64,
        #[arg(long, default_value_t = 4)]
        r_max: u32,
        #[arg(long, default_value_t = 12)]
        m_max: u32,
    },
    /// Randers metric checks.
    Randers {
        /// Bump amplitude.
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        /// Bump half-width on [-1, 1].
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 360)]
        rays: usize,
        #[arg(long, default_value_t = 100)]
        paths: usize,
    },
    /// Run every acceptance check.
    VerifyAll,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sequences { .. } => "sequences",
            Command::Tree { .. } => "tree",
            Command::Dim { .. } => "dim",
            Command::Hull { .. } => "hull",
            Command::Cutlocus { .. } => "cutlocus",
            Command::Smooth { .. } => "smooth",
            Command::Randers { .. } => "randers",
            Command::VerifyAll => "verify-all",
        }
    }
}

struct Outcome {
    pass: bool,
    summary: Value,
}

struct Sink<'a> {
    out: Option<&'a Path>,
    formats: BTreeSet<Format>,
    written: Vec<String>,
}

impl Sink<'_> {
    fn emit(&mut self, format: Format, name: &str, body: impl FnOnce() -> cutlocus::Result<String>) -> cutlocus::Result<()> {
        let Some(dir) = self.out else { return Ok(()) };
        if !self.formats.is_empty() && !self.formats.contains(&format) {
            return Ok(());
        }
        std::fs::create_dir_all(dir)?;
        write_text(&dir.join(name), &body()?)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, v: &impl serde::Serialize) -> cutlocus::Result<()> {
        self.emit(Format::Json, name, || {
            serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Io(e.to_string()))
        })
    }
}

fn params(c: &Common) -> cutlocus::Result<ConstructionParams> {
    if c.k < 2 {
        return Err(Error::InvalidParams(format!("k = {} must be at least 2", c.k)));
    }
    let n = c.n.unwrap_or_else(|| canonical_n(c.k).n);
    ConstructionParams::new(c.k, n, c.phi, c.epsilon)?.with_tail_tol(c.tol_tail)
}

fn run(cli: &Cli, sink: &mut Sink) -> cutlocus::Result<Outcome> {
    let c = &cli.common;
    let p = params(c)?;
    match &cli.command {
        Command::Sequences { show, count } => {
            let want = |s: Show| *show == Show::All || *show == s;
            let mut summary = json!({ "k": p.k, "n": p.n, "phi": p.phi });
            let mut csv_cols: Vec<(&str, Vec<f64>)> = Vec::new();
            if want(Show::T) {
                csv_cols.push(("t", (0..*count).map(|i| t_seq(i, &p)).collect()));
            }
            if want(Show::L) {
                csv_cols.push(("l", (0..*count).map(|i| l_seq(i, &p)).collect()));
            }
            if want(Show::R) {
                let r = (0..*count).map(|i| r_seq(i as i32 - 1, &p).map(|b| b.value)).collect::<cutlocus::Result<Vec<_>>>()?;
                summary["r_minus1"] = json!(r[0]);
                summary["tree_length"] = match total_tree_length(&p) {
                    TreeLength::Finite { value, .. } => json!(value),
                    TreeLength::Divergent => json!("divergent"),
                };
                csv_cols.push(("r_prev", r));
            }
            if want(Show::Alpha) {
                csv_cols.push(("alpha", (0..*count).map(|i| alpha_seq(i, &p)).collect::<cutlocus::Result<Vec<_>>>()?));
            }
            for (name, col) in &csv_cols {
                summary[*name] = json!(col.iter().take(4).collect::<Vec<_>>());
            }
            sink.emit(Format::Csv, "sequences.csv", || {
                let mut s = String::from("i");
                for (name, _) in &csv_cols {
                    s.push(',');
                    s.push_str(name);
                }
                s.push('\n');
                for i in 0..*count as usize {
                    s.push_str(&i.to_string());
                    for (_, col) in &csv_cols {
                        s.push(',');
                        s.push_str(&sig17(col[i]));
                    }
                    s.push('\n');
                }
                Ok(s)
            })?;
            Ok(Outcome { pass: true, summary })
        }
        Command::Tree { plane } => {
            let depth = c.depth.unwrap_or(3);
            let tree = build_tree(depth, &p)?;
            let rep = verify_sphere_invariant(&tree);
            let plane = match plane.as_slice() {
                [a, b] if *a < p.n && *b < p.n && a != b => (*a, *b),
                _ => return Err(Error::InvalidParams(format!("plane {plane:?} is not two distinct axes below n"))),
            };
            sink.emit(Format::Csv, "tree.csv", || Ok(tree.to_csv()))?;
            sink.emit(Format::Svg, "tree.svg", || Ok(tree.to_svg(plane)))?;
            sink.json("tree.json", &rep)?;
            Ok(Outcome {
                pass: rep.pass,
                summary: json!({ "depth": depth, "nodes": tree.node_count(), "max_residual": rep.max_residual }),
            })
        }
        Command::Dim { boxcount } => {
            let d = analytic_dimension(p.k, p.n);
            let mut summary = json!({ "k": p.k, "n": p.n, "s": d.s, "in_open_range": d.in_open_range });
            let mut pass = true;
            if p.k > 2 {
                let sys = mandala_system(&p)?;
                let osc = check_open_set_condition(&sys);
                summary["moran"] = json!(moran_dimension(&sys, 1e-14));
                summary["open_set_condition"] = json!(osc.pass);
                pass &= osc.pass;
            }
            if *boxcount {
                let depth = c.depth.unwrap_or(4);
                let pts = mandala_sample(depth, &p)?;
                let ratio = 3f64.powi(1 - p.k as i32);
                let rep = box_counting_dimension(&pts, &geometric_scales(ratio, depth))?;
                summary["boxcount"] = json!({ "points": pts.len(), "slope": rep.slope, "residual": rep.residual });
                pass &= rep.reliable && (rep.slope - d.s).abs() < 0.05;
                sink.json("boxcount.json", &rep)?;
            }
            Ok(Outcome { pass, summary })
        }
        Command::Hull { demo, mesh } => {
            let surface = if *demo {
                assemble_demo(c.n.unwrap_or(3))
            } else {
                assemble_boundary(c.depth.unwrap_or(0), &p)?
            };
            let residual = surface.max_tangency_residual();
            let seam = surface.seam_mismatch();
            sink.emit(Format::Json, "hull.json", || {
                Ok(serde_json::to_string_pretty(&surface.patch_inventory()).map_err(|e| Error::Io(e.to_string()))? + "\n")
            })?;
            if surface.dim == 3 {
                sink.emit(Format::Obj, "hull.obj", || surface.to_obj(*mesh))?;
            }
            if surface.dim == 2 {
                sink.emit(Format::Svg, "hull.svg", || {
                    let (lo, hi) = surface.bounding_box();
                    let mut svg = cutlocus::export::Svg::fit([[lo[0], lo[1]], [hi[0], hi[1]]]);
                    for piece in surface.outline_2d(720) {
                        svg.polyline(&piece, "black", 1.5);
                    }
                    Ok(svg.finish())
                })?;
            }
            Ok(Outcome {
                pass: residual < 1e-9 && seam < 1e-9,
                summary: json!({
                    "dim": surface.dim, "patches": surface.patches.len(), "seams": surface.seams.len(),
                    "max_tangency_residual": residual, "seam_mismatch": seam,
                }),
            })
        }
        Command::Cutlocus { demo, dilate: grow } => {
            let base = if *demo { assemble_demo(2) } else { assemble_boundary(c.depth.unwrap_or(0), &p)? };
            let tree = TreeGeometry::from_skeleton(&base.skeleton);
            let surface = if *grow { dilate(&base, p.epsilon)?.surface } else { base };
            let tol = CutLocusTolerances {
                hausdorff_cells: c.tol_hausdorff,
                concentration: c.tol_concentration,
                resolution: c.grid,
                ..Default::default()
            };
            let (rep, medial) = verify_with_medial(&surface, &tree, &tol)?;
            sink.json("cutlocus.json", &rep)?;
            if let (Some(m), 2) = (&medial, surface.dim) {
                sink.emit(Format::Svg, "cutlocus.svg", || Ok(overlay_svg(&surface, &m.points, &tree)))?;
                sink.emit(Format::Csv, "medial.csv", || {
                    let mut s = String::from("x,y,spread\n");
                    for (pt, sp) in m.points.iter().zip(&m.spreads) {
                        s.push_str(&format!("{},{},{}\n", sig17(pt[0]), sig17(pt[1]), sig17(*sp)));
                    }
                    Ok(s)
                })?;
            }
            Ok(Outcome {
                pass: rep.pass,
                summary: json!({
                    "dim": surface.dim,
                    "hausdorff_cells": rep.medial.as_ref().map(|m| m.hausdorff_cells),
                    "max_spread": rep.concentration.max_spread,
                    "max_tree_deviation": rep.max_tree_deviation,
                }),
            })
        }
        Command::Smooth { demo, fraction, r_max, m_max } => {
            let seam = if *demo { SeamGeometry::demo(p.epsilon)? } else { SeamGeometry::from_params(&p)? };
            let prof = SmoothedProfile::build(seam, *fraction)?;
            let rep = verify_profile(&prof);
            sink.json("profile.json", &json!({ "profile": prof, "report": rep }))?;
            sink.emit(Format::Svg, "profile.svg", || Ok(prof.to_svg()))?;
            let mut summary = json!({
                "x_q": prof.x_q, "x_r": prof.x_r, "x_s": prof.x_s, "y_b": prof.y_b,
                "profile_pass": rep.pass, "normal_crossings": rep.normal_crossings,
            });
            let mut pass = rep.pass;
            if p.k >= 3 {
                let probe = differentiability_probe(*r_max, *m_max, &p)?;
                sink.emit(Format::Csv, "probe.csv", || Ok(probe.to_csv()))?;
                summary["probe_classes"] = json!(probe.trends.iter().map(|t| t.class.as_str()).collect::<Vec<_>>());
                summary["probe_bound"] = json!(probe.bound);
                if *r_max > p.k {
                    pass &= probe.boundary_at_k && probe.bounded_within;
                }
            }
            Ok(Outcome { pass, summary })
        }
        Command::Randers { c: amp, delta, rays, paths } => {
            let bump = BumpH::new(*amp, *delta)?;
            let (rep, csv) = randers_report(bump, p.epsilon, *rays, *paths)?;
            sink.json("randers.json", &rep)?;
            sink.emit(Format::Csv, "rays.csv", || Ok(csv))?;
            Ok(Outcome {
                pass: rep.pass,
                summary: json!({
                    "positivity_margin": rep.positivity.margin,
                    "closedness_residual": rep.closedness_residual,
                    "ball_deviation": rep.ball_deviation,
                    "ball_max_error": rep.ball_max_error,
                    "max_potential_defect": rep.max_potential_defect,
                }),
            })
        }
        Command::VerifyAll => {
            let cfg = SuiteConfig { k: p.k, depth: c.depth.unwrap_or(2), resolution: c.grid, phi: p.phi, epsilon: p.epsilon };
            let results = run_all(&cfg);
            for r in &results {
                eprintln!("{}", r.line());
            }
            let rows: Vec<Value> =
                results.iter().map(|r| json!({ "id": r.id, "name": r.name, "pass": r.pass, "detail": r.detail })).collect();
            sink.json("verify.json", &rows)?;
            let failed: Vec<u32> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
            Ok(Outcome {
                pass: failed.is_empty(),
                summary: json!({ "criteria": results.len(), "failed": failed }),
            })
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidParams(_) => "invalid_params",
        Error::DivergentSeries { .. } => "divergent_series",
        Error::DegenerateAlpha { .. } => "degenerate_alpha",
        Error::AlphabetOutOfRange { .. } => "alphabet_out_of_range",
        Error::BudgetExceeded { .. } => "budget_exceeded",
        Error::DegenerateCollision { .. } => "degenerate_collision",
        Error::DegenerateScales(_) => "degenerate_scales",
        Error::TangencyViolation { .. } => "tangency_violation",
        Error::OverlappingHoles { .. } => "overlapping_holes",
        Error::UnsupportedDimension(_) => "unsupported_dimension",
        Error::EmptySet => "empty_set",
        Error::NoAdmissibleYb { .. } => "no_admissible_yb",
        Error::AmplitudeTooLarge(_) => "amplitude_too_large",
        Error::PositivityViolated { .. } => "positivity_violated",
        Error::OutsideDomain(_) => "outside_domain",
        Error::SeamMismatch(_) => "seam_mismatch",
        Error::Io(_) => "io",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("cutlocus: cannot set thread count: {e}");
        }
    }
    let mut sink = Sink { out: cli.common.out.as_deref(), formats: cli.common.format.iter().copied().collect(), written: vec![] };
    let name = cli.command.name();
    let result = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&cli, &mut sink))) {
        Ok(r) => r,
        Err(_) => {
            println!("{}", json!({ "command": name, "status": "error", "kind": "internal", "message": "internal error" }));
            return ExitCode::from(2);
        }
    };
    match result {
        Ok(outcome) => {
            let mut s = outcome.summary;
            s["command"] = json!(name);
            s["status"] = json!(if outcome.pass { "pass" } else { "fail" });
            if !sink.written.is_empty() {
                s["artifacts"] = json!(sink.written);
            }
            println!("{s}");
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("cutlocus {name}: check failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            println!("{}", json!({ "command": name, "status": "error", "kind": error_kind(&e), "message": e.to_string() }));
            eprintln!("cutlocus {name}: {e}");
            ExitCode::from(2)
        }
    }
}
