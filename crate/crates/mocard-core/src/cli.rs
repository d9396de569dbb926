//! Command-line front end.
//!
//! Subcommands: `synth`, `train`, `enroll`, `verify`, `rekey`, `roc`,
//! `replay`, `latency`. Every randomized subcommand takes a mandatory
//! `--seed` and is bit-reproducible under it.
//!
//! Exit codes for the card-facing commands (`enroll`, `verify`, `rekey`):
//! 0 for SW 0x9000, 1 for SW 0x6985, 2 for any other status word. All
//! other commands exit 0 on success and 2 on usage or I/O errors.
//!
//! Output paths given as relative are resolved against `--out-dir` (or the
//! `MOCARD_OUT_DIR` environment variable); input paths are used as given.

use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::apdu::{trace, ApduCommand, ApduResponse, PayloadExtension, RekeyPayload, TemplatePayload, CLA_MOC, INS_ENROLL_TEMPLATE, INS_REKEY_ROTATION, INS_VERIFY_BINARY};
use crate::card::{Card, CardConfig, StatusWord};
use crate::eval::{
    self, build_report, generate_synthetic, group_by_label, read_embeddings_file,
    write_embeddings_file, SyntheticDatasetSpec,
};
use crate::pcaitq::{majority_fuse, train_model, FloatEmbedding, ModelRegistry, PcaItqModel};
use crate::transport::{self, LinkProfile, PayloadConfig};

#[derive(Parser, Debug)]
#[command(
    name = "mocard",
    version,
    about = "Match-on-card face verification toolkit: train binary templates, drive a simulated card over APDUs, evaluate thresholds, model link latency"
)]
struct Cli {
    /// Directory for output files given as relative paths.
    #[arg(long, global = true, env = "MOCARD_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic embedding dataset file.
    Synth(SynthArgs),
    /// Train a PCA-ITQ model and register it under a fresh RotationID.
    Train(TrainArgs),
    /// Enroll an identity on a card (creates the card file if missing).
    Enroll(EnrollArgs),
    /// Verify a probe image against a card.
    Verify(VerifyArgs),
    /// Rotate the card's RotationID, erasing stored templates.
    Rekey(RekeyArgs),
    /// Compute the offline ROC with EER and TPR@FAR operating points.
    Roc(RocArgs),
    /// Replay streamed enrol/verify transactions and emit the JSON report.
    Replay(ReplayArgs),
    /// Sweep the transport latency model and emit CSV/JSON reports.
    Latency(LatencyArgs),
}

#[derive(Args, Debug, Clone)]
struct SyntheticOpts {
    /// Generate the dataset instead of reading an embeddings file.
    #[arg(long)]
    synthetic: bool,
    #[arg(long, default_value_t = 55)]
    identities: usize,
    #[arg(long, default_value_t = 8)]
    images_per_identity: usize,
    #[arg(long, default_value_t = 128)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma_between: f64,
    #[arg(long, default_value_t = 0.9)]
    sigma_within: f64,
}

impl SyntheticOpts {
    fn spec(&self, seed: u64) -> SyntheticDatasetSpec {
        SyntheticDatasetSpec {
            n_identities: self.identities,
            images_per_identity: self.images_per_identity,
            dim: self.dim,
            sigma_between: self.sigma_between,
            sigma_within: self.sigma_within,
            seed,
        }
    }
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    opts: SyntheticOpts,
    #[arg(long)]
    seed: u64,
    /// Output file; `.csv` writes CSV, anything else the EMB1 container.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Embeddings file (EMB1 or CSV) to train on.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    embeddings: Option<PathBuf>,
    #[command(flatten)]
    synth: SyntheticOpts,
    /// Template length in bits.
    #[arg(long, value_parser = parse_bits, default_value = "64")]
    bits: u16,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    itq_iterations: usize,
    /// Model registry directory.
    #[arg(long, default_value = "models")]
    registry: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct CardCreateOpts {
    /// Accept threshold used when creating a card file.
    #[arg(long)]
    tau: Option<u16>,
    /// EEPROM quota in bytes for a newly created card.
    #[arg(long, default_value_t = 256)]
    quota: usize,
    /// Require issuer authentication for enroll/rekey on a new card.
    #[arg(long)]
    require_auth: bool,
    /// Lock out after this many consecutive failed verifies per session.
    #[arg(long)]
    rate_limit: Option<u32>,
    /// Reserve per-record integrity tag bytes (8..=16) on a new card.
    #[arg(long)]
    tag_bytes: Option<u8>,
    /// Full card config as a JSON document; overrides the flags above.
    #[arg(long)]
    card_config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct PayloadOpts {
    /// Emit the 8-byte payload header carrying SaltID and TemplateID.
    #[arg(long)]
    long_form: bool,
    #[arg(long)]
    salt_id: Option<u16>,
    #[arg(long)]
    template_id: Option<u16>,
}

impl PayloadOpts {
    fn extension(&self) -> Option<PayloadExtension> {
        if self.long_form || self.salt_id.is_some() || self.template_id.is_some() {
            Some(PayloadExtension {
                salt_id: self.salt_id.unwrap_or(0),
                template_id: self.template_id.unwrap_or(0),
            })
        } else {
            None
        }
    }
}

#[derive(Args, Debug)]
struct EnrollArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    card: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    /// Identity to enroll.
    #[arg(long)]
    label: u32,
    /// Image indices (within the identity) to fuse; defaults to a seeded
    /// random pick of two.
    #[arg(long, value_delimiter = ',')]
    indices: Option<Vec<usize>>,
    #[arg(long, required_unless_present = "indices")]
    seed: Option<u64>,
    #[command(flatten)]
    payload: PayloadOpts,
    #[command(flatten)]
    create: CardCreateOpts,
    /// Mark this session as issuer-authenticated.
    #[arg(long)]
    auth: bool,
    /// Append hex APDU trace lines to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    card: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    label: u32,
    /// Image index (within the identity) to probe with.
    #[arg(long)]
    index: usize,
    #[command(flatten)]
    payload: PayloadOpts,
    #[arg(long)]
    auth: bool,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RekeyArgs {
    #[arg(long)]
    card: PathBuf,
    #[arg(long)]
    new_rotation_id: u16,
    #[command(flatten)]
    create: CardCreateOpts,
    #[arg(long)]
    auth: bool,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RocArgs {
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// FAR targets for operating-point selection.
    #[arg(long = "far-target", value_name = "FAR")]
    far_targets: Vec<f64>,
    /// JSON summary output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Full per-threshold curve as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    embeddings: Option<PathBuf>,
    #[command(flatten)]
    synth: SyntheticOpts,
    #[arg(long)]
    model: PathBuf,
    /// Fixed verify threshold; alternative to --far-target.
    #[arg(long, conflicts_with = "far_target")]
    tau: Option<u32>,
    /// Derive the threshold from the offline ROC at this FAR target.
    #[arg(long = "far-target", required_unless_present = "tau")]
    far_target: Option<f64>,
    #[arg(long)]
    seed: u64,
    /// Worker threads for the replay loop.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// JSON report output.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LatencyArgs {
    /// Link profile document (JSON list); defaults to the calibrated sweep.
    #[arg(long)]
    profiles: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the default profile document to this path and exit.
    #[arg(long)]
    write_default_profiles: Option<PathBuf>,
}

fn parse_bits(s: &str) -> std::result::Result<u16, String> {
    let bits: u16 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if crate::apdu::TEMPLATE_LENGTHS_BITS.contains(&bits) {
        Ok(bits)
    } else {
        Err(format!("template length must be one of 16, 32, 64, 128 (got {bits})"))
    }
}

/// Parse and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version through this path with code 0.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let out_dir = cli.out_dir;
    match cli.command {
        Command::Synth(args) => cmd_synth(&out_dir, args),
        Command::Train(args) => cmd_train(&out_dir, args),
        Command::Enroll(args) => cmd_enroll(&out_dir, args),
        Command::Verify(args) => cmd_verify(&out_dir, args),
        Command::Rekey(args) => cmd_rekey(&out_dir, args),
        Command::Roc(args) => cmd_roc(&out_dir, args),
        Command::Replay(args) => cmd_replay(&out_dir, args),
        Command::Latency(args) => cmd_latency(&out_dir, args),
    }
}

/// Resolve an output path against the output directory.
fn out_path(out_dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        out_dir.join(path)
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    Ok(())
}

fn append_trace(path: &Path, lines: &[String]) -> Result<()> {
    ensure_parent(path)?;
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    for line in lines {
        writeln!(file, "{line}")?;
    }
    Ok(())
}

fn sw_exit_code(sw: u16) -> i32 {
    match sw {
        0x9000 => 0,
        0x6985 => 1,
        _ => 2,
    }
}

fn describe_sw(sw: u16) -> String {
    match StatusWord::from_value(sw) {
        Some(word) => format!("SW {sw:04X} ({})", word.description()),
        None => format!("SW {sw:04X}"),
    }
}

fn load_embeddings(path: &Path) -> Result<Vec<FloatEmbedding>> {
    read_embeddings_file(path).with_context(|| format!("reading embeddings {}", path.display()))
}

fn images_of_label(embeddings: &[FloatEmbedding], label: u32) -> Result<Vec<FloatEmbedding>> {
    let groups = group_by_label(embeddings);
    groups
        .get(&label)
        .map(|v| v.iter().map(|e| (*e).clone()).collect())
        .ok_or_else(|| anyhow!("no embeddings with label {label}"))
}

fn cmd_synth(out_dir: &Path, args: SynthArgs) -> Result<i32> {
    let spec = args.opts.spec(args.seed);
    let data = generate_synthetic(&spec)?;
    let path = out_path(out_dir, &args.out);
    ensure_parent(&path)?;
    write_embeddings_file(&path, &data)?;
    println!(
        "wrote {} embeddings ({} identities x {}, dim {}) to {}",
        data.len(),
        spec.n_identities,
        spec.images_per_identity,
        spec.dim,
        path.display()
    );
    Ok(0)
}

fn cmd_train(out_dir: &Path, args: TrainArgs) -> Result<i32> {
    let embeddings = match &args.embeddings {
        Some(path) => load_embeddings(path)?,
        None => generate_synthetic(&args.synth.spec(args.seed))?,
    };
    let registry = ModelRegistry::open(out_path(out_dir, &args.registry))?;
    let rotation_id = registry.next_rotation_id()?;
    let (model, _) = train_model(&embeddings, args.bits, args.itq_iterations, args.seed, rotation_id)?;
    let path = registry.store(&model)?;
    // Read back and verify the stored parameters kept their invariants.
    ModelRegistry::open(registry.dir())?
        .load(rotation_id)?
        .check_orthogonality(1e-6)?;
    println!("rotation_id: {rotation_id}");
    println!("model: {}", path.display());
    Ok(0)
}

fn load_or_create_card(
    card_path: &Path,
    create: &CardCreateOpts,
    tau_bits: Option<u16>,
) -> Result<Card> {
    if card_path.exists() {
        let bytes = std::fs::read(card_path)
            .with_context(|| format!("reading card state {}", card_path.display()))?;
        return Ok(Card::load(&bytes)?);
    }
    let config = if let Some(config_path) = &create.card_config {
        let text = std::fs::read_to_string(config_path)
            .with_context(|| format!("reading card config {}", config_path.display()))?;
        serde_json::from_str::<CardConfig>(&text)
            .with_context(|| format!("parsing card config {}", config_path.display()))?
    } else {
        let mut config = CardConfig {
            eeprom_quota_bytes: create.quota,
            require_issuer_auth: create.require_auth,
            rate_limit: create.rate_limit,
            integrity_tag_bytes: create.tag_bytes,
            ..CardConfig::default()
        };
        match (create.tau, tau_bits) {
            (Some(tau), Some(bits)) => {
                config.thresholds.insert(bits, tau);
            }
            (Some(_), None) => bail!("--tau given but no template length to attach it to"),
            (None, Some(_)) => {
                bail!("creating {}: --tau is required", card_path.display())
            }
            (None, None) => {}
        }
        config
    };
    Ok(Card::new(config)?)
}

fn save_card(card: &Card, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    std::fs::write(path, card.save()).with_context(|| format!("writing {}", path.display()))
}

/// Run one framed command against a card loaded from (and saved back to)
/// disk, with optional tracing. Returns the status word.
fn card_transaction(
    card: &mut Card,
    raw_command: &[u8],
    trace_path: Option<&Path>,
) -> Result<ApduResponse> {
    let response = card.process(raw_command);
    if let Some(path) = trace_path {
        append_trace(
            path,
            &[trace::command_line(raw_command), trace::response_line(&response)],
        )?;
    }
    Ok(response)
}

fn cmd_enroll(out_dir: &Path, args: EnrollArgs) -> Result<i32> {
    let model = PcaItqModel::read_file(&args.model)?;
    let embeddings = load_embeddings(&args.embeddings)?;
    let images = images_of_label(&embeddings, args.label)?;

    let indices: Vec<usize> = match &args.indices {
        Some(list) => list.clone(),
        None => {
            let seed = args.seed.expect("clap enforces --seed without --indices");
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            rand::seq::index::sample(&mut rng, images.len(), 2.min(images.len())).into_vec()
        }
    };
    let templates = indices
        .iter()
        .map(|&i| {
            images
                .get(i)
                .ok_or_else(|| anyhow!("index {i} out of range for label {} ({} images)", args.label, images.len()))
                .and_then(|e| Ok(model.encode_embedding(e)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = majority_fuse(&templates)?;

    let card_path = out_path(out_dir, &args.card);
    let mut card = load_or_create_card(&card_path, &args.create, Some(model.length_bits))?;
    card.set_issuer_authenticated(args.auth);

    let mut payload = TemplatePayload::new(model.rotation_id, reference);
    if let Some(ext) = args.payload.extension() {
        payload = payload.with_extension(ext);
    }
    let raw = ApduCommand::new(CLA_MOC, INS_ENROLL_TEMPLATE, payload.encode())
        .serialize()
        .map_err(|e| anyhow!("framing enroll command: {e}"))?;
    let trace_path = args.trace.as_ref().map(|p| out_path(out_dir, p));
    let response = card_transaction(&mut card, &raw, trace_path.as_deref())?;
    save_card(&card, &card_path)?;
    println!("ENROLL label {} -> {}", args.label, describe_sw(response.sw));
    Ok(sw_exit_code(response.sw))
}

fn cmd_verify(out_dir: &Path, args: VerifyArgs) -> Result<i32> {
    let model = PcaItqModel::read_file(&args.model)?;
    let embeddings = load_embeddings(&args.embeddings)?;
    let images = images_of_label(&embeddings, args.label)?;
    let image = images.get(args.index).ok_or_else(|| {
        anyhow!(
            "index {} out of range for label {} ({} images)",
            args.index,
            args.label,
            images.len()
        )
    })?;
    let probe = model.encode_embedding(image)?;

    let card_path = out_path(out_dir, &args.card);
    let bytes = std::fs::read(&card_path)
        .with_context(|| format!("reading card state {}", card_path.display()))?;
    let mut card = Card::load(&bytes)?;
    card.set_issuer_authenticated(args.auth);

    let mut payload = TemplatePayload::new(model.rotation_id, probe);
    if let Some(ext) = args.payload.extension() {
        payload = payload.with_extension(ext);
    }
    let raw = ApduCommand::new(CLA_MOC, INS_VERIFY_BINARY, payload.encode())
        .serialize()
        .map_err(|e| anyhow!("framing verify command: {e}"))?;
    let trace_path = args.trace.as_ref().map(|p| out_path(out_dir, p));
    let response = card_transaction(&mut card, &raw, trace_path.as_deref())?;
    save_card(&card, &card_path)?;
    println!(
        "VERIFY label {} image {} -> {}",
        args.label,
        args.index,
        describe_sw(response.sw)
    );
    Ok(sw_exit_code(response.sw))
}

fn cmd_rekey(out_dir: &Path, args: RekeyArgs) -> Result<i32> {
    let card_path = out_path(out_dir, &args.card);
    let mut card = load_or_create_card(&card_path, &args.create, None)?;
    card.set_issuer_authenticated(args.auth);
    let raw = ApduCommand::new(
        CLA_MOC,
        INS_REKEY_ROTATION,
        RekeyPayload {
            new_rotation_id: args.new_rotation_id,
        }
        .encode(),
    )
    .serialize()
    .expect("rekey command fits a short APDU");
    let trace_path = args.trace.as_ref().map(|p| out_path(out_dir, p));
    let response = card_transaction(&mut card, &raw, trace_path.as_deref())?;
    save_card(&card, &card_path)?;
    println!(
        "REKEY -> rotation {} {}",
        args.new_rotation_id,
        describe_sw(response.sw)
    );
    Ok(sw_exit_code(response.sw))
}

/// Offline ROC summary as written by `roc`.
#[derive(Debug, serde::Serialize, serde::Deserialize)]
struct RocSummary {
    length_bits: u16,
    eer: f64,
    tau_eer: u32,
    tpr_at_far: Vec<eval::TargetOperatingPoint>,
}

fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

fn offline_curve(
    embeddings: &[FloatEmbedding],
    model: &PcaItqModel,
) -> Result<crate::eval::RocCurve> {
    let templates = eval::encode_dataset(embeddings, model)?;
    let scores = eval::all_pairs_scores(&templates)?;
    Ok(eval::compute_roc(&scores)?)
}

fn cmd_roc(out_dir: &Path, args: RocArgs) -> Result<i32> {
    let model = PcaItqModel::read_file(&args.model)?;
    let embeddings = load_embeddings(&args.embeddings)?;
    let curve = offline_curve(&embeddings, &model)?;
    let eer = eval::find_eer(&curve);
    let targets = if args.far_targets.is_empty() {
        vec![0.001, 0.01]
    } else {
        args.far_targets.clone()
    };
    let points = targets
        .iter()
        .map(|&t| eval::tpr_at_far(&curve, t))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let summary = RocSummary {
        length_bits: curve.length_bits,
        eer: round4(eer.eer),
        tau_eer: eer.tau,
        tpr_at_far: points
            .iter()
            .map(|op| eval::TargetOperatingPoint {
                target: op.target_far.unwrap_or(f64::NAN),
                tau: op.tau,
                tpr: round4(op.tpr),
                far: round4(op.far),
            })
            .collect(),
    };
    println!("EER {:.4} at tau {}", summary.eer, summary.tau_eer);
    for p in &summary.tpr_at_far {
        println!(
            "TPR@FAR {:.4}: tau {} tpr {:.4} far {:.4}",
            p.target, p.tau, p.tpr, p.far
        );
    }
    if let Some(path) = &args.out {
        let path = out_path(out_dir, path);
        ensure_parent(&path)?;
        std::fs::write(&path, serde_json::to_string_pretty(&summary)?)?;
        println!("report: {}", path.display());
    }
    if let Some(path) = &args.csv {
        let path = out_path(out_dir, path);
        ensure_parent(&path)?;
        let mut csv = String::from("tau,tpr,far,frr\n");
        for row in &curve.rows {
            csv.push_str(&format!(
                "{},{:.6},{:.6},{:.6}\n",
                row.tau, row.tpr, row.far, row.frr
            ));
        }
        std::fs::write(&path, csv)?;
        println!("curve: {}", path.display());
    }
    Ok(0)
}

fn cmd_replay(out_dir: &Path, args: ReplayArgs) -> Result<i32> {
    let model = PcaItqModel::read_file(&args.model)?;
    let embeddings = match &args.embeddings {
        Some(path) => load_embeddings(path)?,
        None => generate_synthetic(&args.synth.spec(args.seed))?,
    };
    let curve = offline_curve(&embeddings, &model)?;
    let eer = eval::find_eer(&curve);

    let mut targets = vec![0.001, 0.01];
    if let Some(t) = args.far_target {
        if !targets.contains(&t) {
            targets.push(t);
        }
    }
    let points = targets
        .iter()
        .map(|&t| eval::tpr_at_far(&curve, t))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let tau = match (args.tau, args.far_target) {
        (Some(tau), _) => tau,
        (None, Some(target)) => eval::tpr_at_far(&curve, target)?.tau,
        (None, None) => unreachable!("clap enforces tau xor far-target"),
    };

    let outcome = eval::streamed_replay(&embeddings, &model, tau, args.seed, args.jobs)?;
    for label in &outcome.skipped_labels {
        eprintln!("warning: identity {label} skipped (fewer than 3 images)");
    }
    let report = build_report(&eer, &points, &outcome, args.seed);

    let path = out_path(out_dir, &args.out);
    ensure_parent(&path)?;
    std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
    if let Some(trace_file) = &args.trace {
        let lines: Vec<String> = outcome.trace_lines().map(str::to_string).collect();
        append_trace(&out_path(out_dir, trace_file), &lines)?;
    }
    println!(
        "replayed {} transactions at tau {}: tp {} fn {} fp {} tn {}",
        outcome.transactions.len(),
        tau,
        outcome.confusion.tp,
        outcome.confusion.fn_,
        outcome.confusion.fp,
        outcome.confusion.tn
    );
    println!(
        "streamed tpr {:.4} far {:.4}",
        report.streamed.tpr, report.streamed.far
    );
    println!("report: {}", path.display());
    Ok(0)
}

fn cmd_latency(out_dir: &Path, args: LatencyArgs) -> Result<i32> {
    if let Some(path) = &args.write_default_profiles {
        let path = out_path(out_dir, path);
        ensure_parent(&path)?;
        std::fs::write(
            &path,
            serde_json::to_string_pretty(&transport::default_profiles())?,
        )?;
        println!("profiles: {}", path.display());
        return Ok(0);
    }
    let profiles: Vec<LinkProfile> = match &args.profiles {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading profiles {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing profiles {}", path.display()))?
        }
        None => transport::default_profiles(),
    };
    let configs: Vec<PayloadConfig> = transport::default_configs();
    let report = transport::sweep(&profiles, &configs)?;
    let csv = report.to_csv();
    print!("{csv}");
    if let Some(path) = &args.csv {
        let path = out_path(out_dir, path);
        ensure_parent(&path)?;
        std::fs::write(&path, &csv)?;
    }
    if let Some(path) = &args.json {
        let path = out_path(out_dir, path);
        ensure_parent(&path)?;
        let mut rounded = report.clone();
        for row in &mut rounded.rows {
            row.t_io_ms = round4(row.t_io_ms);
            row.t_total_ms = round4(row.t_total_ms);
        }
        std::fs::write(&path, serde_json::to_string_pretty(&rounded)?)?;
    }
    Ok(0)
}
