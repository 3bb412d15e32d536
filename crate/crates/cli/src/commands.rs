use std::fs;
use std::path::{Path, PathBuf};

use scramblekit::attack::{self, Attacker, SweepOptions};
use scramblekit::dataset::{self, DatasetRecord, ExportFormat, ExportOptions, Manifest, Mode};
use scramblekit::keyschedule::tags;
use scramblekit::pngio::{read_png, write_png};
use scramblekit::rng::mix;
use scramblekit::{
    augment, descramble, permutation_from_key, scramble, AugmentConfig, BlockSpec,
    DeterministicRng, Image, KeySet, ScrambleKey, TestCrop,
};

use crate::config::ConfigFile;
use crate::{
    AttackArgs, BlockArgs, CliError, DecryptImageArgs, EncryptDatasetArgs, EncryptImageArgs,
    PreviewArgs, SeedArg,
};

const PNG_TEXT_KEY: &str = "scramblekit";

type CliResult<T = ()> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn block_spec(args: &BlockArgs, conf: &ConfigFile) -> CliResult<BlockSpec> {
    let bx = conf.pick(args.bx, "bx", 8)?;
    let by = conf.pick(args.by, "by", 8)?;
    Ok(BlockSpec::new(bx, by)?)
}

fn master_seed(arg: &SeedArg, conf: &ConfigFile) -> CliResult<u64> {
    match arg.master_seed {
        Some(seed) => Ok(seed),
        None => conf.get("master_seed")?.ok_or_else(|| {
            usage("a master seed is required (--master-seed, SCRAMBLEKIT_SEED or master_seed=)")
        }),
    }
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

/// Loads up to `limit` images from PNG files and CIFAR-10 batches, in argument order.
fn load_images(inputs: &[PathBuf], limit: usize) -> CliResult<Vec<Image>> {
    let mut out = Vec::new();
    for path in inputs {
        if out.len() >= limit {
            break;
        }
        if is_png(path) {
            out.push(read_png(path)?.image);
        } else {
            let records = dataset::load_cifar10(path)?;
            out.extend(records.into_iter().take(limit - out.len()).map(|r| r.image));
        }
    }
    Ok(out)
}

/// Test augmentation sized to the input image.
fn test_augment_for(image: &Image, test_crop: TestCrop) -> AugmentConfig {
    AugmentConfig {
        crop_out_h: image.height(),
        crop_out_w: image.width(),
        test_crop,
        ..AugmentConfig::cifar_testing()
    }
}

pub fn encrypt_dataset(args: &EncryptDatasetArgs, conf: &ConfigFile) -> CliResult {
    let split: String = conf.pick(args.split.clone(), "split", "train".to_string())?;
    let mode_name: Option<String> = match &args.mode {
        Some(m) => Some(m.clone()),
        None => conf.get("mode")?,
    };
    let mode = match (split.as_str(), mode_name) {
        ("test", None) => Mode::Test,
        ("test", Some(m)) => {
            return Err(usage(format!("--mode {m} applies to the train split only")))
        }
        ("train", m) => m
            .as_deref()
            .unwrap_or("select")
            .parse::<Mode>()
            .map_err(usage)?,
        (other, _) => return Err(usage(format!("unknown split `{other}`"))),
    };
    if mode == Mode::Test && split != "test" {
        return Err(usage("mode test is selected with --split test"));
    }
    let deterministic = conf.switch(args.deterministic_test_crop, "deterministic_test_crop")?;
    if deterministic && split != "test" {
        return Err(usage(
            "--deterministic-test-crop applies to the test split only",
        ));
    }
    let no_augment = conf.switch(args.no_augment, "no_augment")?;
    let format: ExportFormat = conf
        .pick(args.format.clone(), "format", "bin".to_string())?
        .parse()
        .map_err(usage)?;
    let spec = block_spec(&args.block, conf)?;
    let n_keys: usize = conf.pick(
        args.n_keys,
        "n_keys",
        scramblekit::keyschedule::DEFAULT_KEYS_PER_IMAGE,
    )?;
    if n_keys == 0 {
        return Err(usage("--n-keys must be at least 1"));
    }
    let epoch: u64 = conf.pick(args.epoch, "epoch", 0)?;
    let seed = master_seed(&args.seed, conf)?;

    let records = dataset::load_cifar10_many(&args.input)?;
    let keyset = KeySet::new(seed, records.len(), n_keys)?;
    let (encrypted, manifest) = if mode == Mode::Test {
        let cfg = AugmentConfig {
            test_crop: if deterministic {
                TestCrop::Center
            } else {
                TestCrop::Random
            },
            ..AugmentConfig::cifar_testing()
        };
        dataset::encrypt_test_set(&records, &keyset, (!no_augment).then_some(&cfg), spec)?
    } else {
        let cfg = AugmentConfig::cifar_training();
        dataset::encrypt_training_epoch(
            &records,
            &keyset,
            epoch,
            (!no_augment).then_some(&cfg),
            spec,
            mode,
        )?
    };
    let options = ExportOptions {
        format,
        include_keys: args.include_keys.then_some(seed),
    };
    let written = dataset::export_dataset(&encrypted, &manifest, &args.out, options)?;
    println!(
        "wrote {} encrypted images ({} mode, epoch {}) to {}",
        written.entries.len(),
        written.mode,
        written.epoch,
        args.out.display()
    );
    Ok(())
}

pub fn encrypt_image(args: &EncryptImageArgs, conf: &ConfigFile) -> CliResult {
    let spec = block_spec(&args.block, conf)?;
    let input = read_png(&args.input)?.image;
    let image = if args.augment {
        let crop = if args.deterministic_test_crop {
            TestCrop::Center
        } else {
            TestCrop::Random
        };
        let cfg = test_augment_for(&input, crop);
        let mut rng = DeterministicRng::new(mix(args.seed ^ tags::TEST_AUGMENT));
        eprintln!(
            "warning: augmentation is not invertible; decryption recovers the augmented image"
        );
        augment::augment_testing(&input, &cfg, &mut rng)?
    } else {
        input
    };
    let encrypted = scramble(&image, ScrambleKey(args.seed), spec)?;
    let note = format!(
        "augmented={} bx={} by={}",
        u8::from(args.augment),
        spec.block_width(),
        spec.block_height()
    );
    write_png(&args.out, &encrypted, &[(PNG_TEXT_KEY, &note)])?;
    Ok(())
}

pub fn decrypt_image(args: &DecryptImageArgs, conf: &ConfigFile) -> CliResult {
    let spec = block_spec(&args.block, conf)?;
    let input = read_png(&args.input)?;
    if input
        .text_value(PNG_TEXT_KEY)
        .is_some_and(|t| t.split_whitespace().any(|f| f == "augmented=1"))
    {
        eprintln!(
            "warning: this image was augmented before encryption; augmentation is not \
             invertible, so the output is the augmented image, not the original"
        );
    }
    let plain = descramble(&input.image, ScrambleKey(args.seed), spec)?;
    write_png(&args.out, &plain, &[])?;
    Ok(())
}

fn emit_table(lines: &[String], out: Option<&Path>) -> CliResult {
    let mut text = String::new();
    for line in lines {
        println!("{line}");
        text.push_str(line);
        text.push('\n');
    }
    if let Some(path) = out {
        fs::write(path, text).map_err(|e| {
            CliError::Data(scramblekit::Error::Io {
                path: path.to_path_buf(),
                source: e,
            })
        })?;
    }
    Ok(())
}

pub fn attack(args: &AttackArgs, conf: &ConfigFile) -> CliResult {
    let n_images: usize = conf.pick(args.n_images, "n_images", 100)?;
    if n_images == 0 {
        return Err(usage("--n-images must be at least 1"));
    }
    if let Some(dir) = &args.export_dir {
        let line = attack_export(dir, n_images)?;
        return emit_table(&[line], args.out.as_deref());
    }
    if args.input.is_empty() {
        return Err(usage("no images to attack: pass --input or --export-dir"));
    }
    let sizes: Vec<usize> = match &args.block_sizes {
        Some(s) => s.clone(),
        None => match conf.get::<String>("block_sizes")? {
            Some(s) => s
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse()
                        .map_err(|e| usage(format!("block_sizes: {e}")))
                })
                .collect::<CliResult<_>>()?,
            None => vec![4, 8, 16],
        },
    };
    if sizes.is_empty() {
        return Err(usage("--block-sizes is empty"));
    }
    let specs = sizes
        .iter()
        .map(|&s| BlockSpec::square(s))
        .collect::<Result<Vec<_>, _>>()?;
    let seed = args
        .seed
        .master_seed
        .map_or_else(|| conf.get("master_seed").map(|s| s.unwrap_or(0)), Ok)?;

    let images = load_images(&args.input, n_images)?;
    if images.is_empty() {
        return Err(usage("no images to attack: the inputs are empty"));
    }
    let keyset = KeySet::new(seed, images.len(), 1)?;
    let options = SweepOptions {
        attacker: if args.with_key {
            Attacker::WithKey
        } else {
            Attacker::Greedy
        },
        augment: args.augment.then(AugmentConfig::cifar_training),
    };
    let rows = attack::security_sweep::<u64, f64>(&images, &specs, &keyset, &options)?;
    let lines: Vec<String> = rows.iter().map(ToString::to_string).collect();
    emit_table(&lines, args.out.as_deref())
}

/// Attacks exported images against the keys recorded in their manifest.
fn attack_export(dir: &Path, n_images: usize) -> CliResult<String> {
    let manifest = Manifest::read(dir.join(dataset::MANIFEST_FILE))?;
    let spec = manifest.block_spec;
    let entries: Vec<_> = manifest.entries.iter().take(n_images).collect();
    if entries.is_empty() {
        return Err(usage("the export's manifest has no entries"));
    }
    if entries.iter().any(|e| e.key.is_none()) {
        return Err(usage(
            "the manifest carries no keys; re-export with --include-keys",
        ));
    }
    let mut bins: std::collections::HashMap<PathBuf, Vec<DatasetRecord>> = Default::default();
    let mut reports = Vec::with_capacity(entries.len());
    for entry in entries {
        let (path, record) = dataset::resolve_entry_path(dir, entry);
        let image = match record {
            Some(k) => {
                if !bins.contains_key(&path) {
                    let loaded = dataset::load_cifar10(&path)?;
                    bins.insert(path.clone(), loaded);
                }
                bins[&path]
                    .get(k)
                    .ok_or_else(|| {
                        CliError::Data(scramblekit::Error::MalformedDataset(format!(
                            "{} has no record {k}",
                            path.display()
                        )))
                    })?
                    .image
                    .clone()
            }
            None => read_png(&path)?.image,
        };
        let grid = spec.check(&image)?;
        if grid.len() < 2 {
            return Ok(attack::SweepRow::<f64> {
                spec,
                n_images: 0,
                outcome: attack::SweepOutcome::NothingToAttack,
            }
            .to_string());
        }
        let truth = permutation_from_key(ScrambleKey(entry.key.expect("checked")), grid.len())?;
        let assembly = attack::greedy_assemble::<u64>(&image, spec)?;
        reports.push(attack::attack_metrics::<f64>(
            &truth,
            &assembly.estimated,
            grid,
        )?);
    }
    let mean = attack::AttackReport::mean(&reports).expect("non-empty");
    Ok(attack::SweepRow {
        spec,
        n_images: reports.len(),
        outcome: attack::SweepOutcome::Report(mean),
    }
    .to_string())
}

pub fn preview(args: &PreviewArgs, conf: &ConfigFile) -> CliResult {
    let n: usize = conf.pick(args.n_images, "n_images", 4)?;
    if n == 0 {
        return Err(usage("--n-images must be at least 1"));
    }
    let spec = block_spec(&args.block, conf)?;
    let seed = master_seed(&args.seed, conf)?;
    let images = load_images(&args.input, n)?;
    if images.is_empty() {
        return Err(usage("no images to preview"));
    }
    let keyset = KeySet::new(seed, images.len(), 1)?;
    let pairs = images
        .into_iter()
        .enumerate()
        .map(|(i, image)| {
            let cfg = test_augment_for(&image, TestCrop::Random);
            let record = DatasetRecord {
                image,
                label: 0,
                source_index: i,
            };
            let enc = dataset::encrypt_test(&record, &keyset, args.augment.then_some(&cfg), spec)?;
            Ok((record.image, enc))
        })
        .collect::<Result<Vec<_>, scramblekit::Error>>()?;
    let montage = scramblekit::preview::montage(&pairs)?;
    write_png(&args.out, &montage, &[])?;
    println!(
        "wrote {}-image preview to {}",
        pairs.len(),
        args.out.display()
    );
    Ok(())
}
