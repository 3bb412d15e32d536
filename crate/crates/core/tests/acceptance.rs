//! Acceptance criteria. Runs as a plain binary and prints one PASS/FAIL line per
//! criterion; exits non-zero if any criterion fails.

mod common;

use std::fs;
use std::process::ExitCode;

use common::*;
use scramblekit::attack::{self, greedy_assemble, SweepOptions, SweepOutcome};
use scramblekit::augment::{gridmask, GridMaskConfig};
use scramblekit::dataset::{self, ExportFormat, ExportOptions, Mode};
use scramblekit::scramble::apply_permutation;
use scramblekit::{
    descramble, permutation_from_key, scramble, BlockSpec, DeterministicRng, Error, GridShape,
    Image, KeySet, Permutation, ScrambleKey,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn squares(sides: &[usize]) -> Vec<BlockSpec> {
    sides
        .iter()
        .map(|&s| BlockSpec::square(s).unwrap())
        .collect()
}

fn round_trip_law() -> Outcome {
    let mut rng = RefSplitMix(1);
    let mut checked = 0;
    for i in 0..1000u64 {
        let img = noise_image(i, 32, 32, 3);
        for spec in squares(&[4, 8, 16]) {
            let key = ScrambleKey(rng.next());
            let back = descramble(&scramble(&img, key, spec).unwrap(), key, spec).unwrap();
            let diffs = back
                .pixels()
                .iter()
                .zip(img.pixels())
                .filter(|(a, b)| a != b)
                .count();
            ensure(
                diffs == 0,
                format!("image {i}, {spec:?}: {diffs} byte differences"),
            )?;
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} image/spec/key triples, 0 byte differences"
    ))
}

fn golden_determinism() -> Outcome {
    let mut rng = DeterministicRng::new(0);
    let stream = [rng.next_u64(), rng.next_u64()];
    ensure(
        stream == [0xE220_A839_7B1D_CDAF, 0x6E78_9E6A_A1B9_65F4],
        format!("seed 0 stream {stream:x?}"),
    )?;
    let mut reference = RefSplitMix(0);
    ensure(
        stream == [reference.next(), reference.next()],
        "reference oracle disagrees",
    )?;
    let perm = permutation_from_key(ScrambleKey(42), 4).unwrap();
    ensure(
        perm.mapping() == [2, 0, 3, 1],
        format!("seed 42 permutation {:?}", perm.mapping()),
    )?;
    ensure(
        perm.mapping() == ref_shuffle(42, 4).as_slice(),
        "reference shuffle disagrees",
    )?;
    let mut one = DeterministicRng::new(1);
    let draws: Vec<u64> = (0..5).map(|_| one.below(10).unwrap()).collect();
    ensure(
        draws == [5, 9, 0, 5, 1],
        format!("seed 1 bound 10 draws {draws:?}"),
    )?;
    Ok("seed 0 -> 0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4; seed 42, n=4 -> [2, 0, 3, 1]".into())
}

fn histogram_preservation() -> Outcome {
    let mut rng = RefSplitMix(2);
    for i in 0..1000u64 {
        let img = noise_image(10_000 + i, 32, 32, 3);
        let spec = squares(&[4, 8, 16])[(i % 3) as usize];
        let enc = scramble(&img, ScrambleKey(rng.next()), spec).unwrap();
        let mut a = img.pixels().to_vec();
        let mut b = enc.pixels().to_vec();
        a.sort_unstable();
        b.sort_unstable();
        ensure(a == b, format!("image {i}: multiset changed"))?;
    }
    Ok("1000 images, multisets identical".into())
}

fn gridmask_coverage() -> Outcome {
    let cfg = GridMaskConfig {
        keep_ratio: 0.6,
        apply_probability: 1.0,
        ..GridMaskConfig::default()
    };
    let img = Image::filled(32, 32, 3, 255).unwrap();
    let mut rng = DeterministicRng::new(6);
    let draws = 10_000;
    let mut total = 0.0;
    for _ in 0..draws {
        let out = gridmask(&img, &cfg, &mut rng).unwrap();
        let masked = out.pixels().chunks_exact(3).filter(|p| p[0] == 0).count();
        total += masked as f64 / 1024.0;
    }
    let mean = total / draws as f64;
    ensure(
        (mean - 0.16).abs() <= 0.03,
        format!("mean masked fraction {mean:.4}"),
    )?;
    Ok(format!(
        "mean masked fraction {mean:.4} (target 0.16 +/- 0.03)"
    ))
}

fn key_selection_marginals() -> Outcome {
    let ks = KeySet::new(0x000C_1FA4, 1, 4).unwrap();
    let epochs = 10_000u64;
    let mut counts = [0usize; 4];
    for epoch in 0..epochs {
        let sel = ks.select_slot(epoch, 1).unwrap();
        counts[sel.chosen_s - 1] += 1;
        let key = ks.select_epoch_key(epoch, 1).unwrap();
        ensure(
            key == ks.derive_key(1, sel.chosen_s).unwrap(),
            "selected key mismatch",
        )?;
    }
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / epochs as f64).collect();
    ensure(
        freqs.iter().all(|f| (f - 0.25).abs() <= 0.02),
        format!("frequencies {freqs:?}"),
    )?;
    Ok(format!(
        "frequencies {:.4} {:.4} {:.4} {:.4}",
        freqs[0], freqs[1], freqs[2], freqs[3]
    ))
}

fn cifar_conformance() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let images: Vec<(Image, u8)> = (0..10_000u64)
        .map(|i| (noise_image(i, 32, 32, 3), (i % 10) as u8))
        .collect();
    let bytes = cifar_bytes(&images);
    ensure(
        bytes.len() == 30_730_000,
        format!("batch has {} bytes", bytes.len()),
    )?;
    let path = dir.path().join("data_batch_1.bin");
    fs::write(&path, &bytes).map_err(|e| e.to_string())?;

    let records = dataset::load_cifar10(&path).map_err(|e| e.to_string())?;
    ensure(
        records.len() == 10_000,
        format!("{} records", records.len()),
    )?;
    ensure(
        records
            .iter()
            .zip(&images)
            .all(|(r, (img, l))| &r.image == img && r.label == *l),
        "decoded records differ from source",
    )?;

    // scramble-free export reproduces the source file byte for byte
    let ks = KeySet::new(1, records.len(), 1).unwrap();
    let whole = BlockSpec::square(32).unwrap();
    let (plain, manifest) =
        dataset::encrypt_training_epoch(&records, &ks, 0, None, whole, Mode::Select).unwrap();
    let out = dir.path().join("plain");
    dataset::export_dataset(&plain, &manifest, &out, ExportOptions::default()).unwrap();
    let exported = fs::read(out.join(dataset::BIN_FILE)).map_err(|e| e.to_string())?;
    ensure(
        exported == bytes,
        "bin export is not byte-identical to the source",
    )?;

    // encrypted export reloads to the same images
    let (enc, manifest) = dataset::encrypt_training_epoch(
        &records[..500],
        &ks,
        0,
        None,
        BlockSpec::square(8).unwrap(),
        Mode::Select,
    )
    .unwrap();
    let out = dir.path().join("enc");
    let options = ExportOptions {
        format: ExportFormat::Bin,
        include_keys: None,
    };
    dataset::export_dataset(&enc, &manifest, &out, options).unwrap();
    let reloaded = dataset::load_cifar10(out.join(dataset::BIN_FILE)).map_err(|e| e.to_string())?;
    ensure(
        reloaded
            .iter()
            .zip(&enc)
            .all(|(r, e)| r.image == e.image && r.label == e.label),
        "encrypted export does not reload bit-exactly",
    )?;

    let mut truncated = bytes[..3073 * 3].to_vec();
    truncated.extend([0u8; 5]);
    let tpath = dir.path().join("truncated.bin");
    fs::write(&tpath, truncated).map_err(|e| e.to_string())?;
    ensure(
        matches!(
            dataset::load_cifar10(&tpath),
            Err(Error::MalformedDataset(_))
        ),
        "truncated file was accepted",
    )?;
    Ok("30,730,000 bytes -> 10,000 records; export byte-identical; truncation rejected".into())
}

fn grid_shapes_up_to(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for rows in 1..=n {
        for cols in 1..=n {
            if (2..=n).contains(&(rows * cols)) {
                out.push((rows, cols));
            }
        }
    }
    out
}

fn attack_sanity() -> Outcome {
    let shape = GridShape::new(4, 4);
    let truth = permutation_from_key(ScrambleKey(5), 16).unwrap();
    let same: scramblekit::AttackReport = attack::attack_metrics(&truth, &truth, shape).unwrap();
    ensure(
        (same.dc, same.nc, same.lc) == (1.0, 1.0, 1.0),
        format!("identity estimate gives {same:?}"),
    )?;

    let mut rng = RefSplitMix(77);
    let trials = 1000;
    let mut dc = 0.0;
    for _ in 0..trials {
        let t = permutation_from_key(ScrambleKey(rng.next()), 16).unwrap();
        let e = permutation_from_key(ScrambleKey(rng.next()), 16).unwrap();
        let r: scramblekit::AttackReport = attack::attack_metrics(&t, &e, shape).unwrap();
        dc += r.dc;
    }
    let mean_dc = dc / trials as f64;
    ensure(
        (mean_dc - 1.0 / 16.0).abs() <= 0.01,
        format!("random Dc {mean_dc:.4}"),
    )?;

    let shapes = grid_shapes_up_to(6);
    let (bx, by) = (3, 2);
    let mut cases = 0;
    for &(rows, cols) in &shapes {
        for sample in 0..12u64 {
            let img = if sample % 2 == 0 {
                noise_image(
                    sample * 1000 + (rows * 10 + cols) as u64,
                    rows * by,
                    cols * bx,
                    3,
                )
            } else {
                let src = natural_image(sample);
                Image::from_fn(rows * by, cols * bx, 3, |y, x, c| src.pixel(y, x)[c]).unwrap()
            };
            let spec = BlockSpec::new(bx, by).unwrap();
            let assembly = greedy_assemble::<u64>(&img, spec).unwrap();
            let n = rows * cols;
            let mut best = u64::MAX;
            for_each_permutation(n, |layout| {
                let p = Permutation::from_mapping(layout.to_vec()).unwrap();
                let arranged = apply_permutation(&img, &p, spec).unwrap();
                best = best.min(seam_cost(&arranged, bx, by));
            });
            let layout = Permutation::from_mapping(assembly.layout()).unwrap();
            let greedy_seams = seam_cost(&apply_permutation(&img, &layout, spec).unwrap(), bx, by);
            ensure(
                greedy_seams == assembly.cost,
                format!(
                    "{rows}x{cols}: reported cost {} vs seams {greedy_seams}",
                    assembly.cost
                ),
            )?;
            ensure(
                assembly.cost >= best,
                format!(
                    "{rows}x{cols}: greedy {} below optimum {best}",
                    assembly.cost
                ),
            )?;
            cases += 1;
        }
    }
    Ok(format!(
        "identity (1,1,1); random Dc {mean_dc:.4}; greedy >= optimum on {cases} cases over {} grid shapes",
        shapes.len()
    ))
}

fn security_direction() -> Outcome {
    let images = natural_images(100);
    let ks = KeySet::new(2021, images.len(), 1).unwrap();
    let rows = attack::security_sweep::<u64, f64>(
        &images,
        &squares(&[16, 8, 4]),
        &ks,
        &SweepOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let lc: Vec<f64> = rows
        .iter()
        .map(|r| match &r.outcome {
            SweepOutcome::Report(rep) => Ok(rep.lc),
            SweepOutcome::NothingToAttack => Err(format!("{r}")),
        })
        .collect::<Result<_, _>>()?;
    ensure(
        lc.windows(2).all(|w| w[1] <= w[0]),
        format!("mean Lc not monotone: {lc:?}"),
    )?;
    Ok(format!(
        "mean Lc 16x16 {:.4} >= 8x8 {:.4} >= 4x4 {:.4} (100 images)",
        lc[0], lc[1], lc[2]
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("round-trip law", round_trip_law),
        ("golden determinism", golden_determinism),
        ("histogram preservation", histogram_preservation),
        ("gridmask coverage", gridmask_coverage),
        ("key-selection marginals", key_selection_marginals),
        ("cifar conformance", cifar_conformance),
        ("attack sanity", attack_sanity),
        ("security direction", security_direction),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let outcome =
            std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
