//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use proxsup::phantoms::{load_image, save_image, save_pgm, shepp_logan};
use proxsup::projector::{
    read_projections, read_system_matrix, write_projections, write_system_matrix, ParallelGeometry,
};
use proxsup::Image;

use crate::config::{Method, RunOptions, RunSettings};
use crate::error::{BenchError, BenchResult};
use crate::experiment::{
    compare_on, dataset_from_projections, run_method, simulate, write_history, write_profile, write_summary_csv,
    Dataset, NoiseSpec, SummaryRow,
};

#[derive(Debug, Parser)]
#[command(name = "proxsup", version, about = "Superiorized CT reconstruction toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a phantom image.
    Phantom(PhantomArgs),
    /// Forward-project an image into parallel-beam data.
    Project(ProjectArgs),
    /// Reconstruct an image from projection data with one method.
    Reconstruct(ReconstructArgs),
    /// Run several methods on identical data and tabulate the results.
    Compare(CompareArgs),
    /// Describe an image, matrix or projection file.
    Info(InfoArgs),
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    /// Rasterize Shepp-Logan on a K×L grid.
    #[arg(long, num_args = 2, value_names = ["K", "L"], required = true)]
    pub shepp_logan: Vec<usize>,
    #[arg(short, long, default_value = "phantom.srim")]
    pub output: PathBuf,
    /// Also write an 8-bit PGM preview.
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    #[arg(long, default_value_t = 60)]
    pub views: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub angle_start: f64,
    /// Defaults to 180/views.
    #[arg(long)]
    pub angle_step: Option<f64>,
    #[arg(long, default_value_t = 201)]
    pub rays: usize,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub offset_min: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub offset_max: f64,
}

impl GeometryArgs {
    pub fn geometry(&self) -> ParallelGeometry {
        let mut g = ParallelGeometry::half_turn(self.views, self.rays);
        g.angle_start_deg = self.angle_start;
        if let Some(step) = self.angle_step {
            g.angle_step_deg = step;
        }
        g.offset_min = self.offset_min;
        g.offset_max = self.offset_max;
        g
    }
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Variance of additive white Gaussian noise.
    #[arg(long)]
    pub noise_variance: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl NoiseArgs {
    pub fn spec(&self) -> Option<NoiseSpec> {
        self.noise_variance.map(|variance| NoiseSpec {
            variance,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub phantom: PathBuf,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Also write the system matrix.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

/// Run tunables; each overrides the same key of `--config`.
#[derive(Debug, Args, Default)]
pub struct RunFlags {
    /// Key-value config file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub beta0: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Absolute residual threshold.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Threshold relative to ‖b‖.
    #[arg(long)]
    pub rel_eps: Option<f64>,
    /// Threshold rescaled from the 200×200, 60-view reference scan.
    #[arg(long)]
    pub scaled_eps: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long)]
    pub max_inner: Option<usize>,
    /// Dual step of the TV prox.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Dual iterations of the TV prox.
    #[arg(long)]
    pub inner_iters: Option<usize>,
    /// Smoothing of the classic TV gradient.
    #[arg(long)]
    pub smoothing: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub box_lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub box_hi: Option<f64>,
}

impl RunFlags {
    fn options(&self, method: Option<Method>) -> BenchResult<RunOptions> {
        let flags = RunOptions {
            method,
            beta0: self.beta0,
            gamma: self.gamma,
            eps: self.eps,
            rel_eps: self.rel_eps,
            scaled_eps: self.scaled_eps,
            max_outer: self.max_outer,
            max_inner: self.max_inner,
            tau: self.tau,
            inner_iters: self.inner_iters,
            smoothing: self.smoothing,
            box_lo: self.box_lo,
            box_hi: self.box_hi,
        };
        Ok(match &self.config {
            Some(path) => flags.over(RunOptions::from_file(path)?),
            None => flags,
        })
    }
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub projections: PathBuf,
    /// Ground truth for MSE reporting.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Defaults to tv-pps.
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[command(flatten)]
    pub run: RunFlags,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Write reconstruction-minus-truth down column C (default: the center column).
    #[arg(long, value_name = "C", num_args = 0..=1)]
    pub profile_column: Option<Option<usize>>,
    /// Write zero in timing columns so artifacts are byte-stable.
    #[arg(long)]
    pub omit_timing: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Use stored projections instead of simulating.
    #[arg(long, conflicts_with_all = ["shepp_logan", "noise_variance"])]
    pub projections: Option<PathBuf>,
    #[arg(long, requires = "projections")]
    pub truth: Option<PathBuf>,
    /// Size of the simulated Shepp-Logan phantom.
    #[arg(long, default_value_t = 64)]
    pub shepp_logan: usize,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["tv-s", "tv-pps"])]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub run: RunFlags,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub omit_timing: bool,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    pub file: PathBuf,
}

pub fn execute(cli: Cli, out: &mut impl Write) -> BenchResult<()> {
    match cli.command {
        Command::Phantom(a) => cmd_phantom(&a, out),
        Command::Project(a) => cmd_project(&a, out),
        Command::Reconstruct(a) => cmd_reconstruct(&a, out),
        Command::Compare(a) => cmd_compare(&a, out),
        Command::Info(a) => cmd_info(&a, out),
    }
}

fn io_context(path: &Path) -> impl Fn(proxsup::Error) -> BenchError + '_ {
    move |e| match BenchError::from(e) {
        BenchError::Io(m) => BenchError::Io(format!("{}: {m}", path.display())),
        other => other,
    }
}

pub fn cmd_phantom(args: &PhantomArgs, out: &mut impl Write) -> BenchResult<()> {
    let (rows, cols) = (args.shepp_logan[0], args.shepp_logan[1]);
    let image = shepp_logan(rows, cols)?;
    save_image(&image, &args.output).map_err(io_context(&args.output))?;
    if let Some(pgm) = &args.pgm {
        save_pgm(&image, pgm).map_err(io_context(pgm))?;
    }
    writeln!(out, "wrote {}x{} phantom to {}", rows, cols, args.output.display())?;
    Ok(())
}

pub fn cmd_project(args: &ProjectArgs, out: &mut impl Write) -> BenchResult<()> {
    let phantom = load_image(&args.phantom).map_err(io_context(&args.phantom))?;
    let settings = RunSettings::default();
    let data = simulate(&phantom, &args.geometry.geometry(), args.noise.spec(), &settings)?;
    write_projections(&args.output, data.system.measurements(), &data.meta).map_err(io_context(&args.output))?;
    if let Some(path) = &args.matrix {
        write_system_matrix(path, data.system.rows(), data.system.num_pixels()).map_err(io_context(path))?;
    }
    writeln!(out, "wrote m={} projections to {}", data.meta.m, args.output.display())?;
    Ok(())
}

fn load_dataset(projections: &Path, truth: Option<&Path>, settings: &RunSettings) -> BenchResult<Dataset> {
    let (b, meta) = read_projections(projections).map_err(io_context(projections))?;
    let truth = truth.map(|p| load_image(p).map_err(io_context(p))).transpose()?;
    dataset_from_projections(b, meta, truth, settings)
}

pub fn cmd_reconstruct(args: &ReconstructArgs, out: &mut impl Write) -> BenchResult<()> {
    let options = args.run.options(args.method)?;
    let method = options.method.unwrap_or(Method::TvPps);
    let settings = options.resolve()?;
    let data = load_dataset(&args.projections, args.truth.as_deref(), &settings)?;
    let profile_column = match args.profile_column {
        None => None,
        Some(_) if data.truth.is_none() => return Err(BenchError::Usage("--profile-column needs --truth".into())),
        Some(c) => Some(c.unwrap_or(data.system.grid().cols() / 2)),
    };

    let run = run_method(&data, method, &settings)?;
    let summary = SummaryRow::from_run(method, &run, data.truth.as_ref())?;

    std::fs::create_dir_all(&args.out_dir)?;
    let image_path = args.out_dir.join("reconstruction.srim");
    save_image(&run.image, &image_path).map_err(io_context(&image_path))?;
    write_history(&run, &args.out_dir.join("history.csv"), args.omit_timing)?;
    let mut file = std::fs::File::create(args.out_dir.join("summary.csv"))?;
    write_summary_csv(std::slice::from_ref(&summary), &mut file, args.omit_timing)?;
    if let (Some(column), Some(truth)) = (profile_column, &data.truth) {
        write_profile(&run.image, truth, column, &args.out_dir.join("profile.csv"))?;
    }
    writeln!(out, "{}", summary.display_line())?;
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs, out: &mut impl Write) -> BenchResult<()> {
    if args.methods.is_empty() {
        return Err(BenchError::Usage("no methods given".into()));
    }
    let settings = args.run.options(None)?.resolve()?;
    let data = match &args.projections {
        Some(p) => load_dataset(p, args.truth.as_deref(), &settings)?,
        None => {
            let phantom = shepp_logan(args.shepp_logan, args.shepp_logan)?;
            simulate(&phantom, &args.geometry.geometry(), args.noise.spec(), &settings)?
        }
    };
    let comparison = compare_on(data, &args.methods, &settings)?;
    comparison.write(&args.out_dir, args.omit_timing)?;
    for run in &comparison.runs {
        let path = args.out_dir.join(format!("{}.srim", run.method.name()));
        save_image(&run.result.image, &path).map_err(io_context(&path))?;
        writeln!(out, "{}", run.summary.display_line())?;
    }
    Ok(())
}

pub fn cmd_info(args: &InfoArgs, out: &mut impl Write) -> BenchResult<()> {
    let path = &args.file;
    let mut magic = [0u8; 4];
    {
        use std::io::Read;
        let mut f = std::fs::File::open(path).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))?;
        let got = f.read(&mut magic)?;
        if got < 4 {
            magic = [0; 4];
        }
    }
    match &magic {
        b"SRIM" => {
            let image: Image = load_image(path).map_err(io_context(path))?;
            let (lo, hi) = image.min_max();
            writeln!(out, "image K={} L={} min={lo} max={hi}", image.rows(), image.cols())?;
        }
        b"SRSM" => {
            let (rows, n) = read_system_matrix(path).map_err(io_context(path))?;
            let nnz: usize = rows.iter().map(|r| r.nnz()).sum();
            writeln!(out, "matrix m={} n={n} nnz={nnz}", rows.len())?;
        }
        _ => {
            let (b, meta) = read_projections(path).map_err(io_context(path))?;
            let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            writeln!(
                out,
                "projections m={} views={} rays_per_view={} angle_step_deg={} grid={}x{} noise_variance={} seed={} norm={norm}",
                meta.m,
                meta.views,
                meta.rays_per_view,
                meta.angle_step_deg,
                meta.grid_rows,
                meta.grid_cols,
                meta.noise_variance,
                meta.seed
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn profile_column_flag_forms() {
        let base = ["proxsup", "reconstruct", "--projections", "p.bin"];
        let parse = |extra: &[&str]| {
            let cli = Cli::try_parse_from(base.iter().chain(extra)).unwrap();
            match cli.command {
                Command::Reconstruct(a) => a.profile_column,
                _ => unreachable!(),
            }
        };
        assert_eq!(parse(&[]), None);
        assert_eq!(parse(&["--profile-column"]), Some(None));
        assert_eq!(parse(&["--profile-column", "7"]), Some(Some(7)));
    }

    #[test]
    fn compare_methods_list() {
        let cli = Cli::try_parse_from(["proxsup", "compare", "--methods", "art,prox-l1"]).unwrap();
        match cli.command {
            Command::Compare(a) => assert_eq!(a.methods, vec![Method::Art, Method::ProxL1]),
            _ => unreachable!(),
        }
    }
}
