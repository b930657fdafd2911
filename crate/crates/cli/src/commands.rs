use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pccc::bounds::{check_ns_improves, ns_threshold, parse_rate, ratio_f64, union_bound, Rate};
use pccc::channel::{ber_simulation, SimConfig};
use pccc::codec::{make_interleaver, puncture, turbo_encode, InterleaverKind};
use pccc::exit::{
    decoding_trajectory, default_ia_grid, transfer_characteristic, tunnel_open, DecoderRole, ExitSetup,
    TrajectoryConfig,
};
use pccc::wef::{constituent_cwef, cwef_to_iowef, free_effective_distance, uniform_interleaver_combine};
use pccc::{build_trellis, parse_generator_spec, PuncturePattern, RscSpec, Trellis, WeightEnumerator};

use crate::config::{format_list, parse_bool, parse_list, KeyValues};
use crate::manifest::RunManifest;
use crate::{BerArgs, BoundArgs, BoundKind, CheckArgs, ExitArgs, ExitMode, RankArgs};

type CliResult<T = ()> = Result<T, String>;

fn err<E: ToString>(e: E) -> String {
    e.to_string()
}

fn code(text: &str) -> CliResult<RscSpec> {
    parse_generator_spec(text).map_err(err)
}

/// Accepts `parent`/`S`, `NS`, `PS` or the full text form.
pub fn parse_pattern(text: &str) -> CliResult<PuncturePattern> {
    match text.trim() {
        "parent" | "S" | "s" => Ok(PuncturePattern::parent()),
        "NS" | "ns" => Ok(PuncturePattern::non_systematic()),
        "PS" | "ps" => Ok(PuncturePattern::partially_systematic()),
        other => other.parse().map_err(err),
    }
}

/// Short name used in file names.
fn pattern_tag(pat: &PuncturePattern) -> String {
    if *pat == PuncturePattern::parent() {
        "S".into()
    } else if *pat == PuncturePattern::non_systematic() {
        "NS".into()
    } else if *pat == PuncturePattern::partially_systematic() {
        "PS".into()
    } else {
        let mask = |m: &[bool]| m.iter().map(|&k| if k { '1' } else { '0' }).collect::<String>();
        format!("{}_{}_{}_{}", pat.classify().label(), mask(pat.keep_systematic()), mask(pat.keep_parity1()), mask(pat.keep_parity2()))
    }
}

fn ebno_tag(ebno: f64) -> String {
    format!("{ebno:.2}dB").replace('-', "m")
}

fn rate_text(r: Rate) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn prepare_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create output directory {}: {e}", dir.display()))
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn finish(manifest: &RunManifest, dir: &Path, outputs: &[PathBuf], start: Instant) -> CliResult {
    let path = manifest.write(dir, outputs, start.elapsed()).map_err(|e| format!("cannot write manifest: {e}"))?;
    for out in outputs {
        println!("wrote {}", out.display());
    }
    println!("manifest {}", path.display());
    Ok(())
}

pub fn check(args: CheckArgs) -> CliResult {
    let spec = code(&args.code)?;
    let child = parse_rate(&args.rates[0]).map_err(err)?;
    let parent = parse_rate(&args.rates[1]).map_err(err)?;
    let threshold = ns_threshold(child, parent).map_err(err)?;
    let t = build_trellis(spec);
    let d = free_effective_distance(&t, true, args.j_max).map_err(err)?;
    let d_ns = free_effective_distance(&t, false, args.j_max).map_err(err)?;
    let verdict = check_ns_improves(d, child, parent).map_err(err)?;
    let text = spec.to_string();
    let ratio = text.split_once(',').map_or("", |(_, r)| r);
    println!("code: ({text},{ratio})");
    println!("d_free_eff: {d}");
    println!("d_free_eff_ns: {d_ns}");
    println!("rates: {} vs {}", rate_text(child), rate_text(parent));
    println!("threshold: {}", rate_text(threshold));
    println!("verdict: {}", if verdict { "YES" } else { "NO" });
    Ok(())
}

fn combined_enumerator(t: &Trellis, n: usize, w_max: usize, j_max: usize, cache: Option<&Path>) -> CliResult<WeightEnumerator> {
    let cached = cache.map(|dir| dir.join(format!("cwef_{}_N{n}_w{w_max}_j{j_max}.txt", t.spec().file_label())));
    if let Some(path) = &cached {
        if let Ok(text) = fs::read_to_string(path) {
            let e = WeightEnumerator::from_text(&text).map_err(|e| format!("corrupt cache {}: {e}", path.display()))?;
            if e.n() == n && e.w_max() <= w_max && e.j_max() <= j_max {
                return Ok(e);
            }
        }
    }
    let constituent = constituent_cwef(t, n, w_max, j_max).map_err(err)?;
    let combined = uniform_interleaver_combine(&constituent, n).map_err(err)?;
    if let Some(path) = &cached {
        prepare_dir(path.parent().expect("cache file has a parent"))?;
        write_file(path, &combined.to_text())?;
    }
    Ok(combined)
}

pub fn bound(args: BoundArgs) -> CliResult {
    let start = Instant::now();
    let spec = code(&args.code)?;
    if args.n < 2 {
        return Err("interleaver size must be at least 2".into());
    }
    let grid = parse_list(&args.grid).map_err(|e| format!("--grid: {e}"))?;
    let t = build_trellis(spec);
    let combined = combined_enumerator(&t, args.n, args.w_max, args.j_max, args.cache.as_deref())?;
    if combined.clamped() {
        eprintln!("note: truncation limits clamped to the block length");
    }
    let mut manifest = RunManifest::new("bound", 0);
    manifest
        .set("code", spec)
        .set("n", args.n)
        .set("kind", format!("{:?}", args.kind).to_lowercase())
        .set("grid", format_list(&grid))
        .set("w_max", combined.w_max())
        .set("j_max", combined.j_max());
    prepare_dir(&args.output.out)?;
    let mut outputs = Vec::new();
    let kinds: &[(bool, &str, PuncturePattern)] = &[
        (true, "S", PuncturePattern::parent()),
        (false, "NS", PuncturePattern::non_systematic()),
    ];
    for (systematic, label, pattern) in kinds {
        let wanted = match args.kind {
            BoundKind::Both => true,
            BoundKind::S => *systematic,
            BoundKind::Ns => !*systematic,
        };
        if !wanted {
            continue;
        }
        let iowef = cwef_to_iowef(&combined, *systematic).map_err(err)?;
        let curve = union_bound(&iowef, ratio_f64(pattern.rate()), &grid).map_err(err)?;
        let path = args.output.out.join(format!("bound_{}_{label}_N{}.csv", spec.file_label(), args.n));
        write_file(&path, &curve.to_csv(Some(&manifest.comment())))?;
        outputs.push(path);
    }
    finish(&manifest, &args.output.out, &outputs, start)
}

const BER_KEYS: &[&str] = &[
    "code",
    "n",
    "pattern",
    "ebno",
    "iterations",
    "max_frames",
    "min_errors",
    "seed",
    "interleaver",
    "interleaver_seed",
    "batch",
    "noiseless",
];

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.trim().parse::<T>().map_err(|_| format!("invalid value `{v}`"))
}

/// File entries first, then flags on top.
fn resolve_ber(args: &BerArgs) -> CliResult<SimConfig> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let kv = KeyValues::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            kv.check_keys(BER_KEYS).map_err(|e| format!("{}: {e}", path.display()))?;
            kv
        }
        None => KeyValues::default(),
    };
    let at = |e: crate::config::LineError| match &args.config {
        Some(path) => format!("{}: {e}", path.display()),
        None => e.to_string(),
    };
    let pick = |flag: Option<String>, key: &str| -> CliResult<Option<String>> {
        Ok(flag.or(file.get(key, |v| Ok(v.to_string())).map_err(at)?))
    };
    let spec = code(&pick(args.code.clone(), "code")?.ok_or("missing `code`")?)?;
    let n = match args.n {
        Some(n) => n,
        None => file.get("n", parse_num::<usize>).map_err(at)?.ok_or("missing `n`")?,
    };
    let pattern = match &args.pattern {
        Some(p) => parse_pattern(p)?,
        None => file.get("pattern", |v| parse_pattern(v)).map_err(at)?.unwrap_or_else(PuncturePattern::parent),
    };
    let ebno = match &args.ebno {
        Some(e) => parse_list(e).map_err(|e| format!("--ebno: {e}"))?,
        None => file.get("ebno", parse_list).map_err(at)?.ok_or("missing `ebno`")?,
    };
    let mut cfg = SimConfig::new(spec, n, pattern, ebno);
    macro_rules! override_num {
        ($field:ident, $key:literal, $ty:ty) => {
            if let Some(v) = args.$field {
                cfg.$field = v;
            } else if let Some(v) = file.get($key, parse_num::<$ty>).map_err(at)? {
                cfg.$field = v;
            }
        };
    }
    override_num!(iterations, "iterations", usize);
    override_num!(max_frames, "max_frames", u64);
    override_num!(min_errors, "min_errors", u64);
    override_num!(seed, "seed", u64);
    override_num!(batch, "batch", usize);
    let il_seed = match args.interleaver_seed {
        Some(s) => s,
        None => file.get("interleaver_seed", parse_num::<u64>).map_err(at)?.unwrap_or(1),
    };
    let il_kind = match &args.interleaver {
        Some(k) => k.clone(),
        None => file.get("interleaver", |v| Ok(v.to_string())).map_err(at)?.unwrap_or_else(|| "random".into()),
    };
    cfg.interleaver = match il_kind.as_str() {
        "random" => InterleaverKind::Random { seed: il_seed },
        "identity" => InterleaverKind::Identity,
        other => return Err(format!("unknown interleaver `{other}` (random or identity)")),
    };
    cfg.noiseless = args.noiseless || file.get("noiseless", parse_bool).map_err(at)?.unwrap_or(false);
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

pub fn ber(args: BerArgs) -> CliResult {
    let start = Instant::now();
    let cfg = resolve_ber(&args)?;
    let mut manifest = RunManifest::new("ber", cfg.seed);
    let (il_kind, il_seed) = match cfg.interleaver {
        InterleaverKind::Identity => ("identity", 0),
        InterleaverKind::Random { seed } => ("random", seed),
    };
    manifest
        .set("code", cfg.code)
        .set("n", cfg.n)
        .set("pattern", &cfg.pattern)
        .set("ebno", format_list(&cfg.ebno_db))
        .set("iterations", cfg.iterations)
        .set("max_frames", cfg.max_frames)
        .set("min_errors", cfg.min_errors)
        .set("seed", cfg.seed)
        .set("interleaver", il_kind)
        .set("interleaver_seed", il_seed)
        .set("batch", cfg.batch)
        .set("noiseless", cfg.noiseless);
    let curve = ber_simulation(&cfg).map_err(err)?;
    prepare_dir(&args.output.out)?;
    let path = args.output.out.join(format!("ber_{}_{}_N{}.csv", cfg.code.file_label(), pattern_tag(&cfg.pattern), cfg.n));
    write_file(&path, &curve.to_csv(Some(&manifest.comment())))?;
    for p in &curve.points {
        println!(
            "ebno_db={:.2} ber={:.3e} errors={} frames={}{}",
            p.ebno_db,
            p.final_ber(),
            p.final_errors(),
            p.frames,
            if p.insufficient { " (fewer than min_errors)" } else { "" }
        );
    }
    finish(&manifest, &args.output.out, &[path], start)
}

pub fn exit(args: ExitArgs) -> CliResult {
    let start = Instant::now();
    let spec = code(&args.code)?;
    let pattern = parse_pattern(&args.pattern)?;
    let ebnos = parse_list(&args.ebno).map_err(|e| format!("--ebno: {e}"))?;
    let t = build_trellis(spec);
    let tag = pattern_tag(&pattern);
    let mut manifest = RunManifest::new("exit", args.seed);
    manifest
        .set("code", spec)
        .set("pattern", &pattern)
        .set("ebno", format_list(&ebnos))
        .set("mode", format!("{:?}", args.mode).to_lowercase())
        .set("seed", args.seed);
    prepare_dir(&args.output.out)?;
    let mut outputs = Vec::new();
    match args.mode {
        ExitMode::Curve => {
            let grid = match &args.ia_grid {
                Some(g) => parse_list(g).map_err(|e| format!("--ia-grid: {e}"))?,
                None => default_ia_grid(),
            };
            manifest
                .set("block_len", args.block_len)
                .set("blocks", args.blocks)
                .set("ia_grid", format_list(&grid))
                .set("eps", args.eps);
            let setup = ExitSetup { trellis: &t, pattern: pattern.clone(), block_len: args.block_len, blocks: args.blocks, seed: args.seed };
            for &ebno in &ebnos {
                let first = transfer_characteristic(&setup, DecoderRole::First, ebno, &grid).map_err(err)?;
                let second = transfer_characteristic(&setup, DecoderRole::Second, ebno, &grid).map_err(err)?;
                for curve in [&first, &second] {
                    let path = args.output.out.join(format!(
                        "exit_{}_{tag}_{}_dec{}.csv",
                        spec.file_label(),
                        ebno_tag(ebno),
                        curve.role.index()
                    ));
                    write_file(&path, &curve.to_csv(Some(&manifest.comment())))?;
                    outputs.push(path);
                }
                let tunnel = tunnel_open(&first, &second, args.eps).map_err(err)?;
                println!(
                    "ebno_db={ebno:.2} tunnel={} min_gap={:.4} at_ia={:.2}",
                    if tunnel.open { "open" } else { "closed" },
                    tunnel.min_gap,
                    tunnel.at
                );
            }
        }
        ExitMode::Trajectory => {
            manifest
                .set("n", args.n)
                .set("frames", args.frames)
                .set("iterations", args.iterations)
                .set("interleaver_seed", args.interleaver_seed)
                .set("noiseless", args.noiseless);
            let cfg = TrajectoryConfig {
                trellis: &t,
                pattern: pattern.clone(),
                n: args.n,
                iterations: args.iterations,
                interleaver: InterleaverKind::Random { seed: args.interleaver_seed },
                frames: args.frames,
                seed: args.seed,
                noiseless: args.noiseless,
            };
            for &ebno in &ebnos {
                let traj = decoding_trajectory(&cfg, ebno).map_err(err)?;
                let path = args.output.out.join(format!("traj_{}_{tag}_N{}_{}.csv", spec.file_label(), args.n, ebno_tag(ebno)));
                write_file(&path, &traj.to_csv(Some(&manifest.comment())))?;
                outputs.push(path);
                let top = traj.steps.iter().position(|s| s.ie2 > 0.95).map(|k| (k + 1).to_string());
                println!(
                    "ebno_db={ebno:.2} final_ie={:.4} top_corner_iteration={}",
                    traj.final_ie(),
                    top.as_deref().unwrap_or("none")
                );
            }
        }
    }
    finish(&manifest, &args.output.out, &outputs, start)
}

/// Smallest transmitted weight over all nonzero inputs of length `n`.
pub fn min_distance(t: &Trellis, pattern: &PuncturePattern, n: usize, interleaver_seed: u64) -> CliResult<usize> {
    if !(1..=16).contains(&n) {
        return Err(format!("exhaustive distance search needs 1 <= N <= 16, got {n}"));
    }
    let il = make_interleaver(InterleaverKind::Random { seed: interleaver_seed }, n).map_err(err)?;
    let mut best = usize::MAX;
    for word in 1u32..(1 << n) {
        let info: Vec<u8> = (0..n).map(|i| ((word >> i) & 1) as u8).collect();
        let cw = turbo_encode(t, &il, &info).map_err(err)?;
        let body = puncture(&cw, pattern).map_err(err)?;
        let weight = body.iter().chain(&cw.tail_systematic).chain(&cw.tail_parity).filter(|&&b| b == 1).count();
        best = best.min(weight);
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub label: String,
    pub pattern: PuncturePattern,
}

pub fn parse_candidates(text: &str) -> CliResult<Vec<Candidate>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (label, body) = match line.split_once(char::is_whitespace) {
            Some((l, rest)) => (l.to_string(), rest.trim()),
            None => (line.to_string(), line),
        };
        let pattern = parse_pattern(body).map_err(|e| format!("line {}: {e}", idx + 1))?;
        out.push(Candidate { label, pattern });
    }
    if out.is_empty() {
        return Err("candidate file lists no patterns".into());
    }
    let rate = out[0].pattern.rate();
    if let Some(c) = out.iter().find(|c| c.pattern.rate() != rate) {
        return Err(format!(
            "rate mismatch: `{}` has rate {} but `{}` has rate {}",
            c.label,
            rate_text(c.pattern.rate()),
            out[0].label,
            rate_text(rate)
        ));
    }
    Ok(out)
}

pub fn rank(args: RankArgs) -> CliResult {
    let start = Instant::now();
    let spec = code(&args.code)?;
    let text = fs::read_to_string(&args.candidates).map_err(|e| format!("cannot read {}: {e}", args.candidates.display()))?;
    let candidates = parse_candidates(&text)?;
    let t = build_trellis(spec);
    let mut manifest = RunManifest::new("rank", args.seed);
    manifest
        .set("code", spec)
        .set("n", args.n)
        .set("ebno", args.ebno)
        .set("blocks", args.blocks)
        .set("small_n", args.small_n)
        .set("eps", args.eps)
        .set("candidates", candidates.iter().map(|c| format!("{} {}", c.label, c.pattern)).collect::<Vec<_>>().join(" | "));
    let grid = default_ia_grid();
    let mut rows = Vec::with_capacity(candidates.len());
    for c in &candidates {
        let setup = ExitSetup { trellis: &t, pattern: c.pattern.clone(), block_len: args.n, blocks: args.blocks, seed: args.seed };
        let first = transfer_characteristic(&setup, DecoderRole::First, args.ebno, &grid).map_err(err)?;
        let second = transfer_characteristic(&setup, DecoderRole::Second, args.ebno, &grid).map_err(err)?;
        let tunnel = tunnel_open(&first, &second, args.eps).map_err(err)?;
        let distance = min_distance(&t, &c.pattern, args.small_n, args.seed)?;
        rows.push((c, tunnel, distance));
    }
    let key = |r: &(&Candidate, pccc::exit::Tunnel, usize)| (r.1.open, r.1.min_gap, r.2);
    // stable: equal keys keep file order
    rows.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        kb.0.cmp(&ka.0).then(kb.1.total_cmp(&ka.1)).then(kb.2.cmp(&ka.2))
    });
    let mut csv = format!("# {}\nrank,label,pattern,rate,tunnel_open,min_gap,min_distance\n", manifest.comment());
    let mut rank = 0;
    for (i, row) in rows.iter().enumerate() {
        if i == 0 || key(row) != key(&rows[i - 1]) {
            rank = i + 1;
        }
        let (c, tunnel, distance) = row;
        println!(
            "{rank}. {} {} open={} min_gap={:.4} min_distance={}",
            c.label, c.pattern, tunnel.open, tunnel.min_gap, distance
        );
        csv.push_str(&format!(
            "{rank},{},{},{},{},{:.6},{}\n",
            c.label,
            c.pattern,
            rate_text(c.pattern.rate()),
            tunnel.open,
            tunnel.min_gap,
            distance
        ));
    }
    prepare_dir(&args.output.out)?;
    let path = args.output.out.join(format!("rank_{}_N{}_{}.csv", spec.file_label(), args.n, ebno_tag(args.ebno)));
    write_file(&path, &csv)?;
    finish(&manifest, &args.output.out, &[path], start)
}
