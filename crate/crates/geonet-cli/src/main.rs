//! `geonet`: build, validate and analyze planar geodesic nets and multinets.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use geonet::constructions::{
    build_double_polygon, build_four_point_trees, build_weighted_triangle, build_y_net_equilateral,
    WeightedTriangleSpec,
};
use geonet::derivseq::{derivative_sequence, gap_analysis};
use geonet::relax::{relax, RelaxProblem};
use geonet::render::{render_svg, RenderStyle};
use geonet::report::{run_report, ReportConfig};
use geonet::star::{build_star, StarConfig};
use geonet::{Ctx, PlanarNet, Point};

#[derive(Parser)]
#[command(name = "geonet", version, about, disable_help_subcommand = true)]
struct Cli {
    /// Significant decimal digits of working precision
    /// (default from GEONET_DIGITS or 50).
    #[arg(long, global = true)]
    digits: Option<u32>,

    /// Balance tolerance override (decimal string).
    #[arg(long, global = true)]
    tolerance: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the stationarity conditions of a net file.
    Validate(ValidateArgs),
    /// Generate one of the example nets.
    Gen(GenArgs),
    /// Build the star G_n(phi).
    Star(StarArgs),
    /// Evaluate the suspension-angle derivative sequence.
    Derivseq(DerivseqArgs),
    /// Minimize total length over free vertex positions.
    Relax(RelaxArgs),
    /// Render a net file to SVG.
    Render(RenderArgs),
    /// Run the full verification pipeline into one JSON report.
    Report(ReportArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Input net (JSON).
    #[arg(long)]
    net: PathBuf,
    /// Write the validation report here (JSON); defaults to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also scan for overlapping edges.
    #[arg(long)]
    overlaps: bool,
}

#[derive(Args)]
struct GenArgs {
    /// One of: y-net, weighted-triangle, double-polygon, four-point-trees.
    example: String,
    /// Nesting depth for the weighted triangle.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Polygon vertex count for the double polygon.
    #[arg(long, default_value_t = 7)]
    n: usize,
    /// Which four-point net to emit: x, tree0 or tree1.
    #[arg(long, default_value = "tree0")]
    which: String,
    /// Output net file (JSON); defaults to stdout.
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Optional SVG rendering.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct StarArgs {
    /// Number of layers to build.
    #[arg(long, default_value_t = 10)]
    layers: usize,
    /// Deviation angle in radians (decimal string). Degrees with a `deg`
    /// suffix are also accepted, e.g. `0.05deg`.
    #[arg(long, default_value = "0")]
    phi: String,
    /// Opening angle in radians, decimal or `p/q`.
    #[arg(long, default_value = "88/21")]
    alpha0: String,
    /// Output net file (JSON).
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Optional SVG rendering.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Per-layer report (JSON).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct DerivseqArgs {
    /// Last index of the sequence.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Opening angle in radians, decimal or `p/q`.
    #[arg(long, default_value = "88/21")]
    alpha0: String,
    /// Write the sequence as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the pairwise-gap report (JSON); defaults to stdout.
    #[arg(long)]
    gaps: Option<PathBuf>,
}

#[derive(Args)]
struct RelaxArgs {
    /// Problem description (JSON).
    #[arg(long)]
    problem: PathBuf,
    /// Write the descent trace here (JSON); defaults to stdout.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Input net (JSON).
    #[arg(long)]
    net: PathBuf,
    /// Output SVG path.
    #[arg(long)]
    svg: PathBuf,
    /// Canvas size in pixels.
    #[arg(long, default_value_t = 800.0)]
    canvas: f64,
    /// Draw interior vertices as dots of this radius.
    #[arg(long, default_value_t = 0.0)]
    interior_dot: f64,
}

#[derive(Args)]
struct ReportArgs {
    /// Number of star layers.
    #[arg(long, default_value_t = 100)]
    layers: usize,
    /// Deviation angle (decimal string, radians).
    #[arg(long, default_value = "0")]
    phi: String,
    /// Opening angle.
    #[arg(long, default_value = "88/21")]
    alpha0: String,
    /// Length of the derivative sequence.
    #[arg(long, default_value_t = 100)]
    deriv_n: usize,
    /// Contraction-claim sweep bound.
    #[arg(long, default_value_t = 1000)]
    claim_upto: usize,
    /// Output path (JSON); defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run() {
        Ok(ok) => {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn effective_digits(cli: &Cli) -> u32 {
    cli.digits
        .or_else(|| std::env::var("GEONET_DIGITS").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(50)
}

/// Accept radians or a `deg`-suffixed value.
fn parse_angle_arg(ctx: Ctx, s: &str) -> Result<String> {
    if let Some(deg) = s.strip_suffix("deg") {
        let v = ctx.parse(deg.trim())?;
        let rad = &(&v * &ctx.pi()) / &ctx.int(180);
        Ok(rad.to_dec_string())
    } else {
        Ok(s.to_string())
    }
}

fn write_or_print(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display()))?,
        None => println!("{content}"),
    }
    Ok(())
}

fn emit_net(net: &PlanarNet, emit: &Option<PathBuf>, svg: &Option<PathBuf>, style: &RenderStyle) -> Result<()> {
    write_or_print(emit, &net.to_json_string())?;
    if let Some(p) = svg {
        fs::write(p, render_svg(net, style)?).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    let digits = effective_digits(&cli);
    let ctx = Ctx::new(digits);

    match &cli.command {
        Command::Validate(args) => {
            let mut net = PlanarNet::from_json_str(&fs::read_to_string(&args.net)?)?;
            if let Some(t) = &cli.tolerance {
                net.set_tolerance(net.ctx().parse(t)?);
            }
            let rep = net.validate();
            let mut out = rep.to_json(12);
            if args.overlaps {
                out["overlaps"] = net.detect_overlaps().to_json(&net);
            }
            write_or_print(&args.report, &serde_json::to_string_pretty(&out)?)?;
            Ok(rep.passes)
        }
        Command::Gen(args) => {
            let style = RenderStyle::default();
            let net = match args.example.as_str() {
                "y-net" => build_y_net_equilateral(ctx),
                "weighted-triangle" => {
                    let spec = WeightedTriangleSpec::pythagorean_5_12_13(ctx, args.k);
                    build_weighted_triangle(ctx, &spec)?
                }
                "double-polygon" => build_double_polygon(ctx, args.n)?,
                "four-point-trees" => {
                    let quad = unit_square(ctx);
                    let nets = build_four_point_trees(ctx, &quad)?;
                    match args.which.as_str() {
                        "x" => nets.x_net,
                        "tree0" => nets
                            .trees
                            .first()
                            .cloned()
                            .context("first tree topology infeasible")?,
                        "tree1" => nets
                            .trees
                            .get(1)
                            .cloned()
                            .context("second tree topology infeasible")?,
                        other => bail!("unknown four-point net {other:?} (use x, tree0 or tree1)"),
                    }
                }
                other => bail!("unknown example {other:?}"),
            };
            emit_net(&net, &args.emit, &args.svg, &style)?;
            Ok(true)
        }
        Command::Star(args) => {
            let phi = parse_angle_arg(ctx, &args.phi)?;
            let cfg = StarConfig::new(digits, args.layers, &phi, &args.alpha0)?;
            let st = build_star(&cfg)?;
            let net = st.to_net()?;
            let validation = net.validate();
            let overlaps = net.detect_overlaps();
            if args.report.is_some() {
                let crosscheck = if cfg.phi.is_zero() {
                    match st.crosscheck_analytic() {
                        Ok(c) => serde_json::json!({
                            "max_alpha_deviation": c.max_alpha_deviation.to_dec_string_digits(6),
                            "max_x_deviation": c.max_x_deviation.to_dec_string_digits(6),
                        }),
                        Err(e) => serde_json::json!({ "error": e.to_string() }),
                    }
                } else {
                    serde_json::Value::Null
                };
                let rep = serde_json::json!({
                    "layers": st.layer_report(),
                    "validation": validation.to_json(12),
                    "overlaps": overlaps.to_json(&net),
                    "crosscheck": crosscheck,
                    "boundary_vertices": net.boundary_count(),
                    "constructed_balanced_layer_vertices": st.constructed_balanced_count(),
                    "fermat_vertices": st.fermat_vertex_count(),
                });
                write_or_print(&args.report, &serde_json::to_string_pretty(&rep)?)?;
            }
            if args.emit.is_some() || args.svg.is_some() {
                emit_net(&net, &args.emit, &args.svg, &RenderStyle::default())?;
            }
            Ok(validation.passes)
        }
        Command::Derivseq(args) => {
            let alpha0 = ctx.parse_ratio(&args.alpha0)?;
            let state = derivative_sequence(ctx, &alpha0, args.n)?;
            if let Some(path) = &args.csv {
                let mut csv = String::from("i,phi_prime,alpha,x,tau,sigma,a,b,c\n");
                for r in &state.rows {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{}\n",
                        r.index,
                        r.phi_prime.to_dec_string(),
                        r.alpha.to_dec_string(),
                        r.x.to_dec_string(),
                        r.tau.to_dec_string(),
                        r.sigma_next.to_dec_string(),
                        r.a.to_dec_string(),
                        r.b.to_dec_string(),
                        r.c.to_dec_string()
                    ));
                }
                fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
            }
            let gaps = gap_analysis(&state.phi_primes())?;
            let rep = serde_json::json!({
                "n": args.n,
                "min_gap": gaps.min_gap.to_dec_string_digits(12),
                "argmin": [gaps.argmin.0, gaps.argmin.1],
                "min_gap_even": gaps.min_gap_even.as_ref().map(|(g, ij)| serde_json::json!({
                    "gap": g.to_dec_string_digits(12), "pair": [ij.0, ij.1]})),
                "min_gap_odd": gaps.min_gap_odd.as_ref().map(|(g, ij)| serde_json::json!({
                    "gap": g.to_dec_string_digits(12), "pair": [ij.0, ij.1]})),
                "log_magnitude_slope": gaps.log_magnitude_slope,
                "increasing_steps": gaps.increasing_steps,
            });
            write_or_print(&args.gaps, &serde_json::to_string_pretty(&rep)?)?;
            Ok(true)
        }
        Command::Relax(args) => {
            let problem = RelaxProblem::from_json_str(&fs::read_to_string(&args.problem)?)?;
            let trace = relax(&problem)?;
            write_or_print(&args.trace, &serde_json::to_string_pretty(&trace.to_json())?)?;
            Ok(trace.converged)
        }
        Command::Render(args) => {
            let net = PlanarNet::from_json_str(&fs::read_to_string(&args.net)?)?;
            let style = RenderStyle {
                canvas: args.canvas,
                interior_dot: args.interior_dot,
                ..Default::default()
            };
            fs::write(&args.svg, render_svg(&net, &style)?)?;
            Ok(true)
        }
        Command::Report(args) => {
            let phi = parse_angle_arg(ctx, &args.phi)?;
            let cfg = ReportConfig {
                digits,
                layers: args.layers,
                phi,
                alpha0: args.alpha0.clone(),
                deriv_n: args.deriv_n,
                claim_upto: args.claim_upto,
            };
            let rep = run_report(&cfg);
            let ok = rep["summary"]["all_checks_pass"].as_bool().unwrap_or(false);
            write_or_print(&args.out, &serde_json::to_string_pretty(&rep)?)?;
            Ok(ok)
        }
    }
}

fn unit_square(ctx: Ctx) -> [Point; 4] {
    [
        Point::new(ctx.int(0), ctx.int(0)),
        Point::new(ctx.int(1), ctx.int(0)),
        Point::new(ctx.int(1), ctx.int(1)),
        Point::new(ctx.int(0), ctx.int(1)),
    ]
}
