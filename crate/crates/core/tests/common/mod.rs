#![allow(dead_code)]

use scramblekit::Image;

/// Reference SplitMix64, written from the published recurrence with u128 products so it
/// shares no code with the crate.
pub struct RefSplitMix(pub u64);

impl RefSplitMix {
    pub fn next(&mut self) -> u64 {
        let m = 1u128 << 64;
        self.0 = ((self.0 as u128 + 0x9E37_79B9_7F4A_7C15u128) % m) as u64;
        let mut z = self.0 as u128;
        z = ((z ^ (z >> 30)) * 0xBF58_476D_1CE4_E5B9u128) % m;
        z = ((z ^ (z >> 27)) * 0x94D0_49BB_1331_11EBu128) % m;
        (z ^ (z >> 31)) as u64
    }

    pub fn below(&mut self, bound: u64) -> u64 {
        let limit = (u64::MAX as u128 + 1) / bound as u128 * bound as u128;
        loop {
            let x = self.next() as u128;
            if x < limit {
                return (x % bound as u128) as u64;
            }
        }
    }

    pub fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Reference Fisher-Yates transcript.
pub fn ref_shuffle(seed: u64, n: usize) -> Vec<usize> {
    let mut rng = RefSplitMix(seed);
    let mut v: Vec<usize> = (0..n).collect();
    let mut i = n;
    while i > 1 {
        i -= 1;
        let j = rng.below(i as u64 + 1) as usize;
        v.swap(i, j);
    }
    v
}

/// Uniformly random image with independent samples.
pub fn noise_image(seed: u64, h: usize, w: usize, c: usize) -> Image {
    let mut rng = RefSplitMix(seed);
    Image::from_fn(h, w, c, |_, _, _| rng.next() as u8).unwrap()
}

/// Natural-looking 32x32x3 test image: a smooth color field of low-frequency
/// sinusoids, a few soft-edged disks and mild noise. Stands in for CIFAR photographs
/// where the real dataset is not available.
pub fn natural_image(seed: u64) -> Image {
    let mut rng = RefSplitMix(seed ^ 0x005E_ED0F_1A4E);
    let base: Vec<f64> = (0..3).map(|_| 40.0 + 170.0 * rng.unit()).collect();
    let waves: Vec<(f64, f64, f64, f64, usize)> = (0..4)
        .map(|_| {
            (
                0.05 + 0.25 * rng.unit(),
                0.05 + 0.25 * rng.unit(),
                std::f64::consts::TAU * rng.unit(),
                15.0 + 35.0 * rng.unit(),
                (rng.next() % 3) as usize,
            )
        })
        .collect();
    let disks: Vec<(f64, f64, f64, [f64; 3])> = (0..3)
        .map(|_| {
            (
                32.0 * rng.unit(),
                32.0 * rng.unit(),
                4.0 + 8.0 * rng.unit(),
                [rng.unit() * 255.0, rng.unit() * 255.0, rng.unit() * 255.0],
            )
        })
        .collect();
    let mut noise = RefSplitMix(seed.wrapping_mul(31).wrapping_add(7));
    Image::from_fn(32, 32, 3, |y, x, c| {
        let (yf, xf) = (y as f64, x as f64);
        let mut v = base[c];
        for &(fy, fx, phase, amp, ch) in &waves {
            let weight = if ch == c { 1.0 } else { 0.4 };
            v += weight * amp * (fy * yf + fx * xf + phase).sin();
        }
        for &(cy, cx, r, color) in &disks {
            let d = ((yf - cy).powi(2) + (xf - cx).powi(2)).sqrt();
            let alpha = (1.0 - (d - r).clamp(0.0, 1.5) / 1.5).clamp(0.0, 1.0) * 0.7;
            v = v * (1.0 - alpha) + color[c] * alpha;
        }
        v += (noise.unit() - 0.5) * 6.0;
        v.round().clamp(0.0, 255.0) as u8
    })
    .unwrap()
}

pub fn natural_images(n: usize) -> Vec<Image> {
    (0..n as u64).map(natural_image).collect()
}

/// CIFAR-10 batch bytes built from images and labels, planar per record.
pub fn cifar_bytes(images: &[(Image, u8)]) -> Vec<u8> {
    let mut out = Vec::with_capacity(images.len() * 3073);
    for (img, label) in images {
        out.push(*label);
        for c in 0..3 {
            for y in 0..32 {
                for x in 0..32 {
                    out.push(img.pixel(y, x)[c]);
                }
            }
        }
    }
    out
}

/// Sum of squared differences over every internal block boundary of `image`, computed
/// straight from pixels.
pub fn seam_cost(image: &Image, bx: usize, by: usize) -> u64 {
    let sq = |a: &[u8], b: &[u8]| -> u64 {
        a.iter()
            .zip(b)
            .map(|(&p, &q)| {
                let d = p as i64 - q as i64;
                (d * d) as u64
            })
            .sum()
    };
    let mut total = 0;
    for y in 0..image.height() {
        for x in (bx..image.width()).step_by(bx) {
            total += sq(image.pixel(y, x - 1), image.pixel(y, x));
        }
    }
    for y in (by..image.height()).step_by(by) {
        for x in 0..image.width() {
            total += sq(image.pixel(y - 1, x), image.pixel(y, x));
        }
    }
    total
}

/// Heap's algorithm over all permutations of `0..n`.
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    f(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}
