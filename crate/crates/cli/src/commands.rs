// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{CommandFactory, Parser, ValueEnum};

use stego_core::cost::{
    self, calibrate_payload_detailed, costs_from_probabilities, is_wet, read_cmap,
    residual_energy_costs, write_cmap, CostMap,
};
use stego_core::image_io::{
    read_pgm, read_pmap, write_container, write_pgm, write_pmap, MMAP_MAGIC,
};
use stego_core::rate_loss::{capacity, EmbeddingConfig, LossConfig};
use stego_core::simulator::{
    apply_modification, simulate_map, RandomField, SimMode, SimOutput, SimulatorParams,
};
use stego_core::srm::{export_table, filter_bank, residuals};
use stego_core::stc::{embed_image, extract_image, message_length_for_payload, ScanOrder};
use stego_core::{BitVector, Image, ProbabilityMap, StcParams};

use crate::error::CliError;
use crate::manifest::Manifest;
use crate::{
    AnalyzeArgs, BatchArgs, CalibrateArgs, Cli, Command, CostsArgs, EmbedArgs, ExportKernelsArgs,
    ExtractArgs, Mode, ReplayArgs, Scan, SimulateArgs,
};

type Outcome = Result<String, CliError>;

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Simulate(a) => simulate(&a),
        Command::Calibrate(a) => calibrate(&a),
        Command::Costs(a) => costs(&a),
        Command::Embed(a) => embed(&a),
        Command::Extract(a) => extract(&a),
        Command::Analyze(a) => analyze(&a),
        Command::ExportKernels(a) => export_kernels(&a),
        Command::Batch(a) => batch(&a),
        Command::Replay(a) => replay(&a),
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::format(format!("{}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::format(format!("{}: {e}", path.display())))
}

fn load_image(path: &Path) -> Result<Image, CliError> {
    read_pgm(&read_bytes(path)?).map_err(|e| in_file(path, e))
}

fn load_pmap(path: &Path) -> Result<ProbabilityMap, CliError> {
    read_pmap(&read_bytes(path)?).map_err(|e| in_file(path, e))
}

fn in_file(path: &Path, e: stego_core::Error) -> CliError {
    let mut err = CliError::from(e);
    err.message = format!("{}: {}", path.display(), err.message);
    err
}

fn manifest_path(explicit: &Option<PathBuf>, out: &Path) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest");
        PathBuf::from(s)
    })
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}

fn record_loss_weights(m: &mut Manifest) {
    let w = LossConfig::default();
    m.set("alpha", w.alpha);
    m.set("beta", w.beta);
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn simulate(a: &SimulateArgs) -> Outcome {
    let cover = load_image(&a.cover)?;
    let pmap = load_pmap(&a.pmap)?;
    let params = SimulatorParams::new(a.lambda)?;
    let (w, h) = cover.dims();
    let noise = RandomField::uniform(w, h, a.seed)?;
    let mode = match a.mode {
        Mode::Staircase => SimMode::Staircase,
        Mode::Tanh => SimMode::Tanh,
    };
    let (mods, raw): (_, Vec<f64>) = match simulate_map(&pmap, &noise, mode, params)? {
        SimOutput::Staircase(m) => {
            let raw = m.values().iter().map(|&v| f64::from(v)).collect();
            (m, raw)
        }
        SimOutput::Tanh(soft) => (soft.round(), soft.values().to_vec()),
    };
    let stego = apply_modification(&cover, &mods)?;
    write_bytes(&a.out, &write_pgm(&stego))?;
    write_bytes(&a.modmap, &write_container(MMAP_MAGIC, w, h, &raw))?;

    let cap = capacity(&pmap).total_bits;
    let mut m = Manifest::for_command("simulate");
    m.set("cover", path_str(&a.cover));
    m.set("pmap", path_str(&a.pmap));
    m.set("seed", a.seed);
    m.set("mode", value_name(a.mode));
    m.set("lambda", a.lambda);
    m.set("out", path_str(&a.out));
    m.set("modmap", path_str(&a.modmap));
    let mpath = manifest_path(&a.manifest, &a.out);
    m.set("manifest", path_str(&mpath));
    record_loss_weights(&mut m);
    m.set("capacity_bits", cap);
    m.set("payload", cap / (w * h) as f64);
    m.set("changes", mods.change_count());
    m.write(&mpath)?;
    Ok(format!(
        "changes={}\npayload={}\n",
        mods.change_count(),
        cap / (w * h) as f64
    ))
}

fn calibrate(a: &CalibrateArgs) -> Outcome {
    let costs = read_cmap(&read_bytes(&a.costs)?).map_err(|e| in_file(&a.costs, e))?;
    let cfg = EmbeddingConfig::new(costs.height(), costs.width(), a.payload)?;
    let cal = calibrate_payload_detailed(&costs, &cfg)?;
    write_bytes(&a.out, &write_pmap(&cal.pmap))?;

    let mut m = Manifest::for_command("calibrate");
    m.set("costs", path_str(&a.costs));
    m.set("payload", a.payload);
    m.set("out", path_str(&a.out));
    let mpath = manifest_path(&a.manifest, &a.out);
    m.set("manifest", path_str(&mpath));
    record_loss_weights(&mut m);
    m.set("mu", cal.mu);
    m.set("capacity_bits", cal.capacity_bits);
    m.set("steps", cal.steps);
    m.write(&mpath)?;
    Ok(format!(
        "mu={}\ncapacity_bits={}\n",
        cal.mu, cal.capacity_bits
    ))
}

fn costs(a: &CostsArgs) -> Outcome {
    let mut m = Manifest::for_command("costs");
    let map = match (&a.pmap, &a.image) {
        (Some(p), _) => {
            m.set("pmap", path_str(p));
            costs_from_probabilities(&load_pmap(p)?)
        }
        (None, Some(i)) => {
            m.set("image", path_str(i));
            residual_energy_costs(&load_image(i)?)?
        }
        (None, None) => return Err(CliError::invalid("one of --pmap or --image is required")),
    };
    write_bytes(&a.out, &write_cmap(&map))?;
    m.set("out", path_str(&a.out));
    let mpath = manifest_path(&a.manifest, &a.out);
    m.set("manifest", path_str(&mpath));
    m.set("wet_count", map.wet_count());
    m.write(&mpath)?;
    Ok(format!("wet_count={}\n", map.wet_count()))
}

fn scan_order(s: Scan) -> ScanOrder {
    match s {
        Scan::RowMajor => ScanOrder::RowMajor,
        Scan::Interleaved => ScanOrder::Interleaved,
    }
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

fn hex_columns(cols: &[u32]) -> String {
    cols.iter()
        .map(|c| format!("{c:x}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_columns(raw: &str) -> Result<Vec<u32>, CliError> {
    raw.split(',')
        .map(|c| {
            u32::from_str_radix(c.trim(), 16)
                .map_err(|_| CliError::format(format!("bad sub-matrix column `{c}` in manifest")))
        })
        .collect()
}

fn embed(a: &EmbedArgs) -> Outcome {
    let cover = load_image(&a.cover)?;
    let pmap = load_pmap(&a.pmap)?;
    let raw = read_bytes(&a.message)?;
    let (message, dims) = if is_pgm(&a.message) {
        let img = read_pgm(&raw).map_err(|e| in_file(&a.message, e))?;
        (BitVector::from_image(&img), Some(img.dims()))
    } else {
        (
            BitVector::from_bit_file(&raw).map_err(|e| in_file(&a.message, e))?,
            None,
        )
    };
    let (w, h) = cover.dims();
    let bits = message.len();
    let padded = match a.payload {
        Some(q) => {
            EmbeddingConfig::new(h, w, q)?;
            let m = message_length_for_payload(q, w, h);
            if bits > m {
                return Err(CliError::invalid(format!(
                    "message of {bits} bits exceeds the {m} bits of payload {q}"
                )));
            }
            message.resized(m)
        }
        None => message,
    };
    if padded.is_empty() {
        return Err(CliError::invalid("message is empty"));
    }
    let params = StcParams::for_payload(a.height, w * h, padded.len())?;
    let stego = embed_image(&cover, &pmap, &padded, &params, scan_order(a.scan), a.seed)?;
    write_bytes(&a.out, &write_pgm(&stego.image))?;

    let mut m = Manifest::for_command("embed");
    m.set("cover", path_str(&a.cover));
    m.set("pmap", path_str(&a.pmap));
    m.set("message", path_str(&a.message));
    if let Some(q) = a.payload {
        m.set("payload", q);
    }
    m.set("seed", a.seed);
    m.set("height", a.height);
    m.set("scan", value_name(a.scan));
    m.set("out", path_str(&a.out));
    let mpath = manifest_path(&a.manifest, &a.out);
    m.set("manifest", path_str(&mpath));
    record_loss_weights(&mut m);
    m.set("stc_columns", hex_columns(params.columns()));
    m.set("message_length", padded.len());
    m.set("message_bits", bits);
    if let Some((mw, mh)) = dims {
        m.set("message_width", mw);
        m.set("message_height", mh);
    }
    m.set("changes", stego.changes);
    m.set("distortion", stego.distortion);
    m.write(&mpath)?;
    Ok(format!(
        "changes={}\ndistortion={}\n",
        stego.changes, stego.distortion
    ))
}

fn extract(a: &ExtractArgs) -> Outcome {
    let m = Manifest::read(&a.manifest)?;
    if m.get("command") != Some("embed") {
        return Err(CliError::format("manifest was not written by `embed`"));
    }
    let stego = load_image(&a.stego)?;
    let height: usize = m.parse_value("height")?;
    let length: usize = m.parse_value("message_length")?;
    let bits: usize = m.parse_value("message_bits")?;
    let seed: u64 = m.parse_value("seed")?;
    let scan = Scan::from_str(m.require("scan")?, false)
        .map_err(|_| CliError::format("manifest has an unknown scan order"))?;
    let params = StcParams::new(height, parse_columns(m.require("stc_columns")?)?, length)?;
    let message = extract_image(&stego, &params, scan_order(scan), seed)?.resized(bits);

    let dims = match (m.get("message_width"), m.get("message_height")) {
        (Some(_), Some(_)) => Some((
            m.parse_value::<usize>("message_width")?,
            m.parse_value::<usize>("message_height")?,
        )),
        _ => None,
    };
    match dims {
        Some((mw, mh)) if is_pgm(&a.out) => {
            write_bytes(&a.out, &write_pgm(&message.to_image(mw, mh)?))?
        }
        _ => write_bytes(&a.out, &message.to_bit_file())?,
    }
    Ok(format!("message_bits={bits}\n"))
}

fn summary(values: impl Iterator<Item = f64>) -> Option<(f64, f64, f64)> {
    let (mut lo, mut hi, mut sum, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        sum += v;
        n += 1;
    }
    (n > 0).then(|| (lo, sum / n as f64, hi))
}

fn report_costs(out: &mut String, costs: &CostMap) {
    let _ = writeln!(out, "wet_count={}", costs.wet_count());
    if let Some((lo, mean, hi)) = summary(costs.values().iter().copied().filter(|&c| !is_wet(c))) {
        let _ = writeln!(out, "cost_min={lo}\ncost_mean={mean}\ncost_max={hi}");
    }
}

fn report_pmap(out: &mut String, pmap: &ProbabilityMap, tiles: usize) {
    let (w, h) = pmap.dims();
    let cap = capacity(pmap);
    let _ = writeln!(out, "capacity_bits={}", cap.total_bits);
    let _ = writeln!(out, "bits_per_pixel={}", cap.total_bits / (w * h) as f64);
    let _ = writeln!(out, "mean_probability={}", pmap.mean());
    let _ = writeln!(out, "clamped_count={}", cost::clamped_count(pmap));
    report_costs(out, &costs_from_probabilities(pmap));

    let mut bins = [0usize; 10];
    for &p in pmap.values() {
        bins[((p / 0.05) as usize).min(9)] += 1;
    }
    for (i, count) in bins.iter().enumerate() {
        let _ = writeln!(
            out,
            "histogram.{:.2}-{:.2}={count}",
            i as f64 * 0.05,
            (i + 1) as f64 * 0.05
        );
    }

    let tiles = tiles.clamp(1, w.min(h));
    for ty in 0..tiles {
        for tx in 0..tiles {
            let (x0, x1) = (tx * w / tiles, (tx + 1) * w / tiles);
            let (y0, y1) = (ty * h / tiles, (ty + 1) * h / tiles);
            let mut sum = 0.0;
            for y in y0..y1 {
                for x in x0..x1 {
                    sum += pmap.get(x, y);
                }
            }
            let _ = writeln!(
                out,
                "tile_mean.{ty}.{tx}={}",
                sum / ((x1 - x0) * (y1 - y0)) as f64
            );
        }
    }
}

fn analyze(a: &AnalyzeArgs) -> Outcome {
    let mut out = String::new();
    if let Some(path) = &a.pmap {
        let pmap = load_pmap(path)?;
        let _ = writeln!(out, "width={}\nheight={}", pmap.width(), pmap.height());
        report_pmap(&mut out, &pmap, a.tiles);
        return Ok(out);
    }
    let path = a
        .image
        .as_ref()
        .ok_or_else(|| CliError::invalid("one of --image or --pmap is required"))?;
    let img = load_image(path)?;
    let _ = writeln!(out, "width={}\nheight={}", img.width(), img.height());
    let stack = residuals(&img)?;
    for (k, e) in filter_bank().kernels().iter().zip(stack.energies()) {
        let _ = writeln!(out, "residual_energy.{}={e}", k.name);
    }
    let costs = residual_energy_costs(&img)?;
    report_costs(&mut out, &costs);
    if let Some(q) = a.payload {
        let cfg = EmbeddingConfig::new(img.height(), img.width(), q)?;
        let cal = calibrate_payload_detailed(&costs, &cfg)?;
        let _ = writeln!(out, "mu={}", cal.mu);
        report_pmap(&mut out, &cal.pmap, a.tiles);
    }
    Ok(out)
}

fn export_kernels(a: &ExportKernelsArgs) -> Outcome {
    write_bytes(&a.out, export_table(&filter_bank()).as_bytes())?;
    Ok(String::new())
}

fn batch(a: &BatchArgs) -> Outcome {
    let text = std::fs::read_to_string(&a.jobs_file)
        .map_err(|e| CliError::format(format!("{}: {e}", a.jobs_file.display())))?;
    let jobs: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let results: Mutex<Vec<Option<Outcome>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..a.jobs.clamp(1, jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(line) = jobs.get(i) else { break };
                let outcome = run_job(line);
                results.lock().unwrap()[i] = Some(outcome);
            });
        }
    });

    let mut out = String::new();
    let mut worst = 0u8;
    for (line, outcome) in jobs.iter().zip(results.into_inner().unwrap()) {
        match outcome.expect("every job ran") {
            Ok(report) => {
                let _ = writeln!(out, "ok {line}");
                out.push_str(&report);
            }
            Err(e) => {
                worst = worst.max(e.code);
                let _ = writeln!(out, "failed {line}: {e}");
            }
        }
    }
    if worst == 0 {
        Ok(out)
    } else {
        print!("{out}");
        Err(CliError {
            code: worst,
            message: "some jobs failed".into(),
        })
    }
}

fn run_job(line: &str) -> Outcome {
    let argv = std::iter::once("stego").chain(line.split_whitespace());
    let cli = Cli::try_parse_from(argv)
        .map_err(|e| CliError::invalid(e.to_string().trim_end().to_string()))?;
    if matches!(cli.command, Command::Batch(_)) {
        return Err(CliError::invalid("batch jobs cannot start another batch"));
    }
    run(cli.command)
}

fn replay(a: &ReplayArgs) -> Outcome {
    let m = Manifest::read(&a.manifest)?;
    let name = m.require("command")?;
    let cmd = Cli::command();
    let sub = cmd
        .find_subcommand(name)
        .filter(|_| !matches!(name, "batch" | "replay"))
        .ok_or_else(|| CliError::format(format!("manifest records unknown command `{name}`")))?;
    let mut argv = vec!["stego".to_string(), name.to_string()];
    for arg in sub.get_arguments() {
        if let Some(long) = arg.get_long() {
            if let Some(v) = m.get(long) {
                argv.push(format!("--{long}"));
                argv.push(v.to_string());
            }
        }
    }
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::format(format!("manifest: {e}")))?;
    run(cli.command)
}
