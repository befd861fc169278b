use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use xyzkit::geometry::{build_pair_set, default_dilations, PinholeCamera};
use xyzkit::io::{
    find_manifests, read_depth_pfm, read_pgm, read_xyz_pfm, write_depth_pfm, EvalMode, SceneManifest,
};
use xyzkit::losses::{scale_invariant_loss, translation_invariant_loss, LossKind};
use xyzkit::pipeline::{evaluate_batch, generate_batch, generate_scene, replay, EvalOptions};
use xyzkit::procgen::SceneConfig;
use xyzkit::render::clean_depth_with;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "xyzkit", version, about = "Procedural vessel scenes, ground-truth rendering and XYZ-map evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate, render and write scenes for a set of seeds.
    Generate {
        /// Seeds, e.g. `1..10` (inclusive), `3,5,8` or `1..4,9`.
        #[arg(long, value_parser = parse_seeds)]
        seeds: Seeds,
        /// TOML scene configuration; missing keys take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Image size as WIDTHxHEIGHT.
        #[arg(long, value_parser = parse_resolution)]
        resolution: Option<(usize, usize)>,
    },
    /// Re-render the scene recorded in a manifest.
    Render {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Render at a different image size instead of replaying exactly.
        #[arg(long, value_parser = parse_resolution)]
        resolution: Option<(usize, usize)>,
    },
    /// Score predictions against generated ground truth.
    Eval {
        /// Directory holding the ground-truth manifests and artifacts.
        #[arg(long)]
        gt: PathBuf,
        /// Directory holding predictions named like the ground-truth files.
        #[arg(long)]
        pred: PathBuf,
        /// vessel-scale, content-scale or segmentation.
        #[arg(long, default_value = "vessel-scale", value_parser = parse_mode)]
        mode: EvalMode,
        /// Restrict to these seeds.
        #[arg(long, value_parser = parse_seeds)]
        seeds: Option<Seeds>,
        /// Pair dilations for scale estimation, e.g. `1,2,4,8`.
        #[arg(long, value_parser = parse_dilations)]
        dilations: Option<Dilations>,
        /// Write report.csv, report.txt and report.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the pairwise loss between two XYZ maps.
    Loss {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Object mask; defaults to the ground truth's valid pixels.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// translation or scale.
        #[arg(long, default_value = "scale")]
        kind: LossKind,
        #[arg(long, value_parser = parse_dilations)]
        dilations: Option<Dilations>,
    },
    /// Drop masked depth pixels far from the object's centroid.
    CleanDepth {
        #[arg(long)]
        depth: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        /// fx,fy,cx,cy in pixels.
        #[arg(long, value_parser = parse_intrinsics)]
        intrinsics: [f64; 4],
        /// Radius in meters.
        #[arg(long, default_value_t = 0.10)]
        radius: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Debug)]
struct Seeds(Vec<u64>);

#[derive(Clone, Debug)]
struct Dilations(Vec<usize>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let mut seeds = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.parse().map_err(|_| format!("bad seed '{a}'"))?;
            let b: u64 = b.trim_start_matches('=').parse().map_err(|_| format!("bad seed '{b}'"))?;
            if a > b {
                return Err(format!("empty seed range {part}"));
            }
            seeds.extend(a..=b);
        } else {
            seeds.push(part.parse().map_err(|_| format!("bad seed '{part}'"))?);
        }
    }
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    seeds.sort_unstable();
    seeds.dedup();
    Ok(Seeds(seeds))
}

fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got '{s}'"))?;
    let w: usize = w.parse().map_err(|_| format!("bad width '{w}'"))?;
    let h: usize = h.parse().map_err(|_| format!("bad height '{h}'"))?;
    if w == 0 || h == 0 {
        return Err("resolution must be nonzero".into());
    }
    Ok((w, h))
}

fn parse_dilations(s: &str) -> Result<Dilations, String> {
    s.split(',')
        .map(|d| d.trim().parse::<usize>().map_err(|_| format!("bad dilation '{d}'")))
        .collect::<Result<_, _>>()
        .map(Dilations)
}

fn parse_intrinsics(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number '{x}'")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| "expected fx,fy,cx,cy".to_string())
}

fn parse_mode(s: &str) -> Result<EvalMode, String> {
    s.parse().map_err(|e: xyzkit::Error| e.to_string())
}

fn load_config(path: Option<&Path>, resolution: Option<(usize, usize)>) -> anyhow::Result<SceneConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => SceneConfig::default(),
    };
    if let Some((w, h)) = resolution {
        cfg.camera.width = w;
        cfg.camera.height = h;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Creates `dir` and checks that files can be written into it.
fn ensure_writable(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("output directory {} is not writable", dir.display()))?;
    Ok(())
}

fn generate(seeds: &[u64], config: Option<&Path>, out: &Path, res: Option<(usize, usize)>) -> anyhow::Result<u8> {
    let cfg = load_config(config, res)?;
    ensure_writable(out)?;
    let results = generate_batch(seeds, &cfg, out);
    let mut failed = Vec::new();
    for (seed, r) in &results {
        match r {
            Ok(g) => println!("seed {seed}: {}", g.manifest_path.display()),
            Err(e) => failed.push((*seed, e.to_string())),
        }
    }
    if failed.is_empty() {
        return Ok(0);
    }
    eprintln!("{} of {} seeds failed:", failed.len(), seeds.len());
    for (seed, e) in &failed {
        eprintln!("  seed {seed}: {e}");
    }
    Ok(if failed.len() == seeds.len() { EXIT_DATA } else { EXIT_PARTIAL })
}

fn render(manifest: &Path, out: &Path, res: Option<(usize, usize)>) -> anyhow::Result<u8> {
    let recorded = SceneManifest::read(manifest)?;
    ensure_writable(out)?;
    let g = match res {
        None => replay(&recorded, out)?,
        Some((w, h)) => {
            let mut cfg = recorded.config.clone();
            cfg.camera.width = w;
            cfg.camera.height = h;
            generate_scene(recorded.seed, &cfg, out)?
        }
    };
    println!("seed {}: {}", g.manifest.seed, g.manifest_path.display());
    Ok(0)
}

fn eval(
    gt: &Path,
    pred: &Path,
    mode: EvalMode,
    seeds: Option<&[u64]>,
    dilations: Option<Vec<usize>>,
    out: Option<&Path>,
) -> anyhow::Result<u8> {
    let mut manifests = find_manifests(gt)?;
    if let Some(seeds) = seeds {
        manifests.retain(|p| {
            SceneManifest::read(p)
                .map(|m| seeds.contains(&m.seed))
                .unwrap_or(true)
        });
    }
    if manifests.is_empty() {
        bail!("no manifests found in {}", gt.display());
    }
    let doc = evaluate_batch(&manifests, pred, &EvalOptions { mode, dilations })?;
    print!("{}", doc.to_table());
    if let Some(out) = out {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        fs::write(out.join("report.csv"), doc.to_csv())?;
        fs::write(out.join("report.txt"), doc.to_table())?;
        fs::write(out.join("report.json"), serde_json::to_string_pretty(&doc)? + "\n")?;
    }
    let failures: Vec<_> = doc.failures().collect();
    if failures.is_empty() {
        return Ok(0);
    }
    eprintln!("{} rows could not be scored", failures.len());
    Ok(EXIT_PARTIAL)
}

fn loss(
    pred: &Path,
    gt: &Path,
    mask: Option<&Path>,
    kind: LossKind,
    dilations: Option<Vec<usize>>,
) -> anyhow::Result<u8> {
    let pred = read_xyz_pfm(pred)?;
    let gt = read_xyz_pfm(gt)?;
    let mask = match mask {
        Some(m) => read_pgm(m)?,
        None => gt.valid_mask(),
    };
    let (w, h) = gt.dims();
    let dilations = dilations.unwrap_or_else(|| default_dilations(w, h));
    let pairs = build_pair_set(&mask, &dilations)?;
    let report = match kind {
        LossKind::TranslationInvariant => translation_invariant_loss(&pred, &gt, &pairs)?,
        LossKind::ScaleInvariant => scale_invariant_loss(&pred, &gt, &pairs)?,
    };
    println!("value: {}", report.value);
    match report.k_used {
        Some(k) => println!("k: {}", k.k()),
        None => println!("k: n/a"),
    }
    println!("control_term: {}", report.control_term_active);
    println!("pairs: {}", report.pair_count);
    Ok(0)
}

fn clean(depth: &Path, mask: &Path, k: [f64; 4], radius: f64, out: &Path) -> anyhow::Result<u8> {
    let depth = read_depth_pfm(depth)?;
    let mask = read_pgm(mask)?;
    let (w, h) = depth.dims();
    let camera = PinholeCamera::intrinsics_only(k[0], k[1], k[2], k[3], w, h)?;
    let cleaned = clean_depth_with(&depth, &camera, &mask, radius)?;
    write_depth_pfm(out, &cleaned)?;
    println!(
        "removed {} of {} pixels",
        depth.valid_count() - cleaned.valid_count(),
        depth.valid_count()
    );
    Ok(0)
}

/// Error chain joined with `: `, skipping causes already quoted by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Generate {
            seeds,
            config,
            out,
            resolution,
        } => generate(&seeds.0, config.as_deref(), &out, resolution),
        Command::Render {
            manifest,
            out,
            resolution,
        } => render(&manifest, &out, resolution),
        Command::Eval {
            gt,
            pred,
            mode,
            seeds,
            dilations,
            out,
        } => eval(
            &gt,
            &pred,
            mode,
            seeds.as_ref().map(|s| s.0.as_slice()),
            dilations.map(|d| d.0),
            out.as_deref(),
        ),
        Command::Loss {
            pred,
            gt,
            mask,
            kind,
            dilations,
        } => loss(&pred, &gt, mask.as_deref(), kind, dilations.map(|d| d.0)),
        Command::CleanDepth {
            depth,
            mask,
            intrinsics,
            radius,
            out,
        } => clean(&depth, &mask, intrinsics, radius, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(EXIT_DATA)
        }
    }
}
