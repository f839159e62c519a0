//! Seeded synthetic datasets with known structure, for tests and the
//! acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{AttackClass, Dataset, Schema};

fn build(n_features: usize, rows: Vec<(Vec<f64>, AttackClass)>) -> Dataset {
    let mut b = Dataset::builder(Schema::numeric(n_features).expect("1..=41 features"));
    for (v, c) in rows {
        b.push_numeric(&v, c).expect("finite synthetic values");
    }
    b.build().with_source("synthetic")
}

/// Two classes (NORMAL, DOS). Each 0-based column in `relevant` equals the
/// class bit flipped with probability `noise`; other columns are uniform
/// integers in 0..4.
pub fn planted_relevance(
    seed: u64,
    n_rows: usize,
    n_features: usize,
    relevant: &[usize],
    noise: f64,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n_rows)
        .map(|_| {
            let y = rng.gen_bool(0.5);
            let v = (0..n_features)
                .map(|j| {
                    if relevant.contains(&j) {
                        let flip = rng.gen_bool(noise);
                        ((y != flip) as u8) as f64
                    } else {
                        rng.gen_range(0..4) as f64
                    }
                })
                .collect();
            (v, if y { AttackClass::Dos } else { AttackClass::Normal })
        })
        .collect();
    build(n_features, rows)
}

/// Like [`planted_relevance`] with graded signal: relevant column `k` is
/// flipped with probability `0.05 + 0.1 * k`, and one extra column copies a
/// relevant one with small noise, so the optimum is not simply "all relevant".
pub fn graded_relevance(seed: u64, n_rows: usize, n_features: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_rel = (n_features / 3).max(2);
    let rows = (0..n_rows)
        .map(|_| {
            let y = rng.gen_bool(0.5);
            let mut v: Vec<f64> = Vec::with_capacity(n_features);
            for j in 0..n_features {
                let x = if j < n_rel {
                    let flip = rng.gen_bool(0.05 + 0.1 * j as f64);
                    ((y != flip) as u8) as f64
                } else if j == n_rel {
                    let flip = rng.gen_bool(0.1);
                    ((v[0] != 0.0) != flip) as u8 as f64
                } else {
                    rng.gen_range(0..3) as f64
                };
                v.push(x);
            }
            (v, if y { AttackClass::Dos } else { AttackClass::Normal })
        })
        .collect();
    build(n_features, rows)
}

/// Three informative columns for NORMAL/DOS plus an exact copy of column 0
/// in column 3 and one noise column.
pub fn duplicate_column(seed: u64, n_rows: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n_rows)
        .map(|_| {
            let y = rng.gen_bool(0.5);
            let a = if rng.gen_bool(0.9) == y { 1.0 } else { 0.0 };
            let b = if rng.gen_bool(0.85) == y { 1.0 } else { 0.0 };
            let c = rng.gen_range(0..3) as f64 + if y { 0.5 } else { 0.0 };
            let noise = rng.gen_range(0..4) as f64;
            (
                vec![a, b, c, a, noise],
                if y { AttackClass::Dos } else { AttackClass::Normal },
            )
        })
        .collect();
    build(5, rows)
}

/// NORMAL / DOS / U2R with four columns:
/// 0 separates DOS from the rest; 1 is the planted U2R indicator;
/// 2 is a decoy that marks U2R but also a third of DOS records;
/// 3 is noise.
pub fn planted_u2r(seed: u64, n_normal: usize, n_dos: usize, n_u2r: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let mut rows = Vec::new();
    for (class, n) in [
        (AttackClass::Normal, n_normal),
        (AttackClass::Dos, n_dos),
        (AttackClass::U2r, n_u2r),
    ] {
        for _ in 0..n {
            let z = |rng: &mut ChaCha8Rng| unit.sample(rng);
            let dos_axis = if class == AttackClass::Dos { 3.0 } else { 0.0 } + z(&mut rng);
            let planted = if class == AttackClass::U2r { 8.0 } else { 0.0 } + 0.3 * z(&mut rng);
            let decoy = match class {
                AttackClass::U2r => 8.0,
                AttackClass::Dos if rng.gen_bool(0.35) => 8.0,
                _ => 0.0,
            } + 0.3 * z(&mut rng);
            let noise = z(&mut rng);
            rows.push((vec![dos_axis, planted, decoy, noise], class));
        }
    }
    build(4, rows)
}

/// XOR of two bits with `noise` label flips and one noise column.
pub fn xor_noise(seed: u64, n_rows: usize, noise: f64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n_rows)
        .map(|_| {
            let a = rng.gen_bool(0.5);
            let b = rng.gen_bool(0.5);
            let y = (a ^ b) != rng.gen_bool(noise);
            (
                vec![a as u8 as f64, b as u8 as f64, rng.gen_range(0..2) as f64],
                if y { AttackClass::Dos } else { AttackClass::Normal },
            )
        })
        .collect();
    build(3, rows)
}

/// Two Gaussian clouds separated by a margin along the first of `n_features`.
pub fn separable(seed: u64, n_rows: usize, n_features: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let rows = (0..n_rows)
        .map(|i| {
            let y = i % 2 == 1;
            let v = (0..n_features)
                .map(|j| {
                    let x: f64 = unit.sample(&mut rng);
                    if j == 0 {
                        (if y { 4.0 } else { -4.0 }) + x.clamp(-2.5, 2.5)
                    } else {
                        x
                    }
                })
                .collect();
            (v, if y { AttackClass::Dos } else { AttackClass::Normal })
        })
        .collect();
    build(n_features, rows)
}

/// KDD-format CSV text (41 features plus a dotted label per line) with a
/// planted signature for each category, about a tenth of the lines repeated.
/// Columns 20 and 21 are constant zero as in the real training file.
pub fn kdd_like_csv(seed: u64, n_rows: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    let mut previous: Vec<String> = Vec::new();
    for _ in 0..n_rows {
        if !previous.is_empty() && rng.gen_bool(0.1) {
            let line = previous[rng.gen_range(0..previous.len())].clone();
            out.push_str(&line);
            continue;
        }
        let line = kdd_like_line(&mut rng);
        out.push_str(&line);
        previous.push(line);
    }
    out
}

fn kdd_like_line(rng: &mut ChaCha8Rng) -> String {
    let draw: f64 = rng.gen();
    let (label, class) = match draw {
        x if x < 0.50 => ("normal", AttackClass::Normal),
        x if x < 0.68 => ("smurf", AttackClass::Dos),
        x if x < 0.83 => ("neptune", AttackClass::Dos),
        x if x < 0.88 => ("ipsweep", AttackClass::Probe),
        x if x < 0.91 => ("portsweep", AttackClass::Probe),
        x if x < 0.95 => ("guess_passwd", AttackClass::R2l),
        x if x < 0.97 => ("warezclient", AttackClass::R2l),
        _ => ("buffer_overflow", AttackClass::U2r),
    };
    let mut v = vec![0.0f64; 41];
    let pick = |rng: &mut ChaCha8Rng, xs: &[&'static str]| xs[rng.gen_range(0..xs.len())];
    let (protocol, service, flag);
    let rate = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| (rng.gen_range(lo..hi) * 100.0).round() / 100.0;
    match (class, label) {
        (AttackClass::Normal, _) => {
            protocol = pick(rng, &["tcp", "tcp", "udp"]);
            service = pick(rng, &["http", "smtp", "domain_u", "ftp_data"]);
            flag = "SF";
            v[0] = rng.gen_range(0..3) as f64;
            v[4] = rng.gen_range(100..3000) as f64;
            v[5] = rng.gen_range(0..8000) as f64;
            v[11] = 1.0;
            v[22] = rng.gen_range(1..20) as f64;
            v[23] = rng.gen_range(1..20) as f64;
            v[28] = rate(rng, 0.8, 1.0);
            v[31] = rng.gen_range(10..255) as f64;
            v[32] = rng.gen_range(10..255) as f64;
        }
        (_, "smurf") => {
            protocol = "icmp";
            service = "ecr_i";
            flag = "SF";
            v[4] = pick(rng, &["1032", "520"]).parse().expect("literal");
            v[22] = rng.gen_range(300..512) as f64;
            v[23] = v[22];
            v[28] = 1.0;
            v[31] = 255.0;
            v[32] = 255.0;
        }
        (_, "neptune") => {
            protocol = "tcp";
            service = pick(rng, &["private", "http", "telnet"]);
            flag = "S0";
            v[22] = rng.gen_range(100..300) as f64;
            v[23] = rng.gen_range(1..25) as f64;
            v[24] = 1.0;
            v[25] = 1.0;
            v[28] = rate(rng, 0.0, 0.1);
            v[31] = 255.0;
            v[32] = rng.gen_range(1..25) as f64;
            v[37] = 1.0;
        }
        (AttackClass::Probe, _) => {
            protocol = pick(rng, &["icmp", "tcp"]);
            service = pick(rng, &["eco_i", "private"]);
            flag = pick(rng, &["SF", "REJ"]);
            v[4] = rng.gen_range(0..20) as f64;
            v[22] = rng.gen_range(1..5) as f64;
            v[26] = rate(rng, 0.5, 1.0);
            v[31] = rng.gen_range(1..100) as f64;
            v[34] = rate(rng, 0.5, 1.0);
            v[35] = rate(rng, 0.5, 1.0);
        }
        (AttackClass::R2l, _) => {
            protocol = "tcp";
            service = pick(rng, &["telnet", "ftp_data", "ftp"]);
            flag = "SF";
            v[0] = rng.gen_range(0..30) as f64;
            v[4] = rng.gen_range(100..400) as f64;
            v[9] = rng.gen_range(0..3) as f64;
            v[10] = if label == "guess_passwd" { 1.0 } else { 0.0 };
            v[22] = 1.0;
            v[23] = 1.0;
            v[31] = rng.gen_range(1..30) as f64;
        }
        _ => {
            protocol = "tcp";
            service = pick(rng, &["telnet", "ftp_data"]);
            flag = "SF";
            v[0] = rng.gen_range(20..300) as f64;
            v[4] = rng.gen_range(1000..3000) as f64;
            v[9] = rng.gen_range(1..5) as f64;
            v[11] = 1.0;
            v[13] = 1.0;
            v[15] = rng.gen_range(0..3) as f64;
            v[16] = rng.gen_range(1..4) as f64;
            v[22] = 1.0;
            v[23] = 1.0;
            v[31] = rng.gen_range(1..10) as f64;
        }
    }
    let mut fields: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    fields[1] = protocol.into();
    fields[2] = service.into();
    fields[3] = flag.into();
    format!("{},{label}.\n", fields.join(","))
}
