//! `poincare`: command line driver for the bound verifier.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::Value;

use poincare_core::anisotropy::BipolarEvaluator;
use poincare_core::config::{parse_anisotropy, parse_config};
use poincare_core::eigen::{minimize_nd, DomainSpec, Scenario};
use poincare_core::emit::{self, DomainFigure, Format};
use poincare_core::geometry::polygon::wulff_shape;
use poincare_core::geometry::slicing::{
    slice_decomposition, zero_p_mean_shift, PMeanField, SlicingTolerances,
};
use poincare_core::geometry::svg::slices_svg;
use poincare_core::optimize::DescentSettings;
use poincare_core::suite::{gallery, run_suite};
use poincare_core::wirtinger::{minimize_1d, pi_p_closed, pi_p_quadrature, Grid1D, Weight1D, Weight1DKind};
use poincare_core::{Anisotropy, ConvexPolygon, DirectionGrid, Error, Vec2, Weight};

#[derive(Parser)]
#[command(name = "poincare", version, about = "Sharp Poincaré bounds for anisotropic weighted problems on convex polygons")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file (or directory, for per-scenario fields).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format: json, csv or svg.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Overrides the seed of every scenario.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// π_p from the closed form and by quadrature.
    PiP {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Polar and bipolar of an anisotropy at given points.
    Polar {
        /// Anisotropy as JSON, e.g. '{"kind":"ellipse","params":{"a":1,"b":2}}'.
        #[arg(long)]
        anisotropy: String,
        /// Point `x,y`; repeatable.
        #[arg(long, value_parser = parse_pair, required = true)]
        eta: Vec<Vec2>,
    },
    /// Euclidean and anisotropic diameters of the configured domains.
    Diameter,
    /// Wulff shape `{H° < R}` as a polygon.
    Wulff {
        #[arg(long)]
        anisotropy: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 512)]
        m: usize,
    },
    /// Zero-mean slicing of the first configured domain.
    Slice {
        /// Slab half-width.
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 24)]
        max_depth: usize,
    },
    /// Weighted one-dimensional Wirtinger constant.
    #[command(name = "solve-1d")]
    Solve1d {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// Weight as JSON, e.g. '{"kind":"exp_linear","c":-3}'.
        #[arg(long, default_value = r#"{"kind":"constant","value":1}"#)]
        weight: String,
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
    },
    /// Minimizes the Rayleigh quotient for each configured scenario.
    #[command(name = "solve-2d")]
    Solve2d,
    /// Verifies the bound on the configured scenarios (default: the gallery).
    Verify,
    /// Runs the ellipse example end to end.
    #[command(name = "example-paper")]
    ExamplePaper {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
}

fn parse_pair(s: &str) -> Result<Vec2, String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [x, y] => {
            let x: f64 = x.trim().parse().map_err(|e| format!("{e}"))?;
            let y: f64 = y.trim().parse().map_err(|e| format!("{e}"))?;
            Ok(Vec2::new(x, y))
        }
        _ => Err(format!("expected `x,y`, got `{s}`")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn format_or(cli: &Cli, default: Format) -> Result<Format> {
    match &cli.format {
        Some(f) => Ok(f.parse::<Format>()?),
        None => Ok(cli
            .out
            .as_deref()
            .and_then(|p| p.extension())
            .and_then(|e| e.to_str())
            .and_then(|e| e.parse().ok())
            .unwrap_or(default)),
    }
}

fn load_scenarios(cli: &Cli) -> Result<Option<Vec<Scenario>>> {
    let Some(path) = &cli.config else { return Ok(None) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut scenarios = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        scenarios = scenarios.into_iter().map(|s| s.with_seed(seed)).collect();
    }
    Ok(Some(scenarios))
}

fn require_scenarios(cli: &Cli) -> Result<Vec<Scenario>> {
    load_scenarios(cli)?.ok_or_else(|| anyhow!("this command needs --config"))
}

fn anisotropy_arg(text: &str) -> Result<Anisotropy> {
    let v: Value = serde_json::from_str(text).context("--anisotropy is not valid JSON")?;
    Ok(parse_anisotropy(&v, "--anisotropy")?)
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::PiP { p, tol } => {
            let closed = pi_p_closed(*p)?;
            let quad = pi_p_quadrature(*p, *tol)?;
            println!("p          {p}");
            println!("closed     {closed:.15}");
            println!("quadrature {quad:.15}");
            println!("difference {:.3e}", (closed - quad).abs());
        }
        Command::Polar { anisotropy, eta } => {
            let h = anisotropy_arg(anisotropy)?;
            let grid = DirectionGrid::default();
            let bipolar = BipolarEvaluator::new(&h, &grid);
            println!("x,y,H,polar,polar_closed_form,bipolar");
            for e in eta {
                let closed = h.polar_closed_form(*e).map_or("-".to_string(), |v| format!("{v:.12}"));
                println!(
                    "{},{},{:.12},{:.12},{},{:.12}",
                    e.x,
                    e.y,
                    h.evaluate(*e)?,
                    h.polar(*e, &grid)?,
                    closed,
                    bipolar.value(*e)
                );
            }
        }
        Command::Diameter => {
            println!("scenario_id,d_euclid,d_h,h_polar_max,naive_product");
            for s in require_scenarios(cli)? {
                let d_e = s.polygon.euclidean_diameter();
                let d_h = s.polygon.anisotropic_diameter(&s.anisotropy, &s.grid)?;
                let hmax = s.anisotropy.max_polar_on_circle(&s.grid)?;
                println!("{},{d_e:.9},{d_h:.9},{hmax:.9},{:.9}", s.id, d_e * hmax);
            }
        }
        Command::Wulff { anisotropy, radius, m } => {
            let h = anisotropy_arg(anisotropy)?;
            let grid = DirectionGrid::default();
            let poly = wulff_shape(&h, *radius, *m, &grid)?;
            let text = match format_or(cli, Format::Json)? {
                Format::Json => serde_json::to_string(&poly)? + "\n",
                Format::Svg => emit::to_svg(&[], &[DomainFigure::new("wulff", &poly, &h, &grid)?]),
                Format::Csv => {
                    let mut s = String::from("x,y\n");
                    for v in poly.vertices() {
                        s.push_str(&format!("{},{}\n", v.x, v.y));
                    }
                    s
                }
            };
            match &cli.out {
                Some(path) => write_out(path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Slice { eps, max_depth } => {
            let scenarios = require_scenarios(cli)?;
            let s = scenarios.first().ok_or_else(|| anyhow!("config has no scenarios"))?;
            slice_command(cli, s, *eps, *max_depth)?;
        }
        Command::Solve1d { p, length, n, weight, max_iter } => {
            let grid = Grid1D::new(*length, *n)?;
            let kind: Weight1DKind = serde_json::from_str(weight).context("--weight is not a valid 1-D weight")?;
            let f = Weight1D::from_kind(grid, kind)?;
            let settings = DescentSettings { max_iter: *max_iter, ..Default::default() };
            let r = minimize_1d(&f, *p, cli.seed.unwrap_or(0), &settings)?;
            println!("mu_hat    {:.10}", r.mu_hat);
            println!("bound     {:.10}", r.bound);
            println!("ratio     {:.6}", r.mu_hat / r.bound);
            println!("converged {}", r.converged);
            println!("start     {}", r.start);
            if let Some(path) = &cli.out {
                write_out(path, &r.minimizer.to_csv())?;
            }
        }
        Command::Solve2d => {
            let scenarios = require_scenarios(cli)?;
            let format = format_or(cli, Format::Csv)?;
            if let Some(dir) = &cli.out {
                if scenarios.len() > 1 {
                    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                }
            }
            println!("scenario_id,mu_hat,slack,iterations,converged");
            for s in &scenarios {
                let r = minimize_nd(s)?;
                println!("{},{:.10},{:.10},{},{}", s.id, r.mu_hat, r.slack, r.iterations, r.converged);
                if let Some(out) = &cli.out {
                    let text = match format {
                        Format::Svg => r.minimizer.to_svg(),
                        Format::Csv => r.minimizer.to_csv(),
                        Format::Json => bail!("fields are exported as csv or svg"),
                    };
                    let path = if scenarios.len() > 1 {
                        let ext = if format == Format::Svg { "svg" } else { "csv" };
                        out.join(format!("{}.{ext}", s.id))
                    } else {
                        out.clone()
                    };
                    write_out(&path, &text)?;
                }
            }
        }
        Command::Verify => {
            let scenarios = match load_scenarios(cli)? {
                Some(s) => s,
                None => {
                    let g = gallery();
                    match cli.seed {
                        Some(seed) => g.into_iter().map(|s| s.with_seed(seed)).collect(),
                        None => g,
                    }
                }
            };
            let run = run_suite(&scenarios, cli.jobs)?;
            for r in &run.reports {
                eprintln!(
                    "{:<40} ratio {:>8.4}  {}{}",
                    r.scenario_id,
                    r.ratio,
                    if r.pass { "pass" } else { "FAIL" },
                    if r.metadata.under_resolved { "  (under-resolved mesh)" } else { "" }
                );
            }
            for (id, err) in &run.failures {
                eprintln!("{id:<40} error: {err}");
            }
            let format = format_or(cli, Format::Json)?;
            match &cli.out {
                Some(path) => {
                    let figures = DomainFigure::for_wulff(&scenarios)?;
                    emit::emit(&run.reports, &figures, format, path)?;
                }
                None => match format {
                    Format::Json => print!("{}", emit::to_json(&run.reports)?),
                    Format::Csv => print!("{}", emit::to_csv(&run.reports)),
                    Format::Svg => print!("{}", emit::to_svg(&run.reports, &DomainFigure::for_wulff(&scenarios)?)),
                },
            }
            return Ok(ExitCode::from(run.exit_code() as u8));
        }
        Command::ExamplePaper { p } => return example_paper(cli, *p),
    }
    Ok(ExitCode::SUCCESS)
}

fn slice_command(cli: &Cli, s: &Scenario, eps: f64, max_depth: usize) -> Result<()> {
    // Linear field along the diameter chord, shifted to zero p-mean.
    let pair = s.polygon.euclidean_diameter_pair();
    let v = s.polygon.vertices();
    let axis = (v[pair.to] - v[pair.from]).normalize();
    let tol = SlicingTolerances::default();
    let linear = move |x: Vec2| x.dot(&axis);
    let t = zero_p_mean_shift(&s.polygon, &linear, &s.weight, s.p, tol.quadrature_levels);
    let u = move |x: Vec2| x.dot(&axis) - t;
    let field = PMeanField { u: &u, weight: &s.weight, p: s.p };
    let (pieces, complete) = match slice_decomposition(&s.polygon, &field, eps, max_depth, &tol) {
        Ok(p) => (p, true),
        Err(Error::PartialSlicing { pieces, .. }) => (pieces, false),
        Err(e) => return Err(e.into()),
    };
    eprintln!("{} pieces{}", pieces.len(), if complete { "" } else { " (depth limit reached)" });
    let text = match format_or(cli, Format::Json)? {
        Format::Json => serde_json::to_string_pretty(&pieces)? + "\n",
        Format::Svg => slices_svg(&s.polygon, &pieces),
        Format::Csv => {
            let mut out = String::from("depth,axis_angle,length,half_width,p_mean_residual,area\n");
            for p in &pieces {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    p.depth,
                    p.axis_angle,
                    p.length,
                    p.half_width,
                    p.p_mean_residual,
                    p.polygon.area()
                ));
            }
            out
        }
    };
    match &cli.out {
        Some(path) => write_out(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn example_paper(cli: &Cli, p: f64) -> Result<ExitCode> {
    let grid = DirectionGrid::default();
    let h = Anisotropy::ellipse(1.0, 2.0)?;
    let poly: ConvexPolygon = wulff_shape(&h, 1.0, 512, &grid)?;
    let d_e = poly.euclidean_diameter();
    let d_h = poly.anisotropic_diameter(&h, &grid)?;
    let hmax = h.max_polar_on_circle(&grid)?;
    println!("domain          Wulff shape of ellipse(a=1, b=2), 512 vertices");
    println!("d_euclid        {d_e:.6}");
    println!("d_h             {d_h:.6}");
    println!("h_polar_max     {hmax:.6}");
    println!("naive product   {:.6} (vs d_h = {d_h:.6})", d_e * hmax);

    let s = Scenario::new("example-ellipse", poly, h.clone(), Weight::default(), p)?
        .with_domain(DomainSpec::Wulff { anisotropy: h, radius: 1.0, m: 512 })
        .with_seed(cli.seed.unwrap_or(0));
    let run = run_suite(std::slice::from_ref(&s), cli.jobs)?;
    let Some(r) = run.reports.first() else {
        bail!("example failed: {:?}", run.failures);
    };
    println!("sharp_bound     {:.6}", r.sharp_bound);
    println!("naive_bound     {:.6}", r.naive_bound);
    println!("mu_hat          {:.6}", r.mu_hat);
    println!("ratio           {:.6}", r.ratio);
    println!("pass            {}", r.pass);
    if let Some(path) = &cli.out {
        let figures = DomainFigure::for_wulff(std::slice::from_ref(&s))?;
        emit::emit(&run.reports, &figures, format_or(cli, Format::Json)?, path)?;
    }
    Ok(ExitCode::from(run.exit_code() as u8))
}
