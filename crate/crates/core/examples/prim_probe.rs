//! Scratch probe: time the dense primitives at tensor-sweep sizes.

use hexglass::linalg::{lq, matmul, svd_truncated};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use std::time::Instant;

fn random(rows: usize, cols: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    (0..rows * cols)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn main() {
    for (rows, cols) in [(1024usize, 512usize), (512, 512), (2048, 512), (512, 256)] {
        let a = random(rows, cols, 1);
        let reps = (4usize).max(64 * 512 / rows.max(cols));
        let t = Instant::now();
        for _ in 0..reps {
            let s = svd_truncated(rows, cols, &a, 512, 0.0, 0.0);
            std::hint::black_box(s.rank);
        }
        println!("svd  {rows}x{cols}: {:?}/op ({reps} reps)", t.elapsed() / reps as u32);
    }
    for (rows, cols) in [(512usize, 1024usize), (256, 512), (512, 2048)] {
        let a = random(rows, cols, 2);
        let reps = 16;
        let t = Instant::now();
        for _ in 0..reps {
            let (l, q) = lq(rows, cols, &a);
            std::hint::black_box((l.len(), q.len()));
        }
        println!("lq   {rows}x{cols}: {:?}/op ({reps} reps)", t.elapsed() / reps as u32);
    }
    for (m, k, n) in [(1024usize, 512usize, 512usize), (512, 512, 1024), (512, 512, 512)] {
        let a = random(m, k, 3);
        let b = random(k, n, 4);
        let reps = 16;
        let t = Instant::now();
        for _ in 0..reps {
            let c = matmul(m, k, n, &a, &b);
            std::hint::black_box(c.len());
        }
        println!("gemm {m}x{k}x{n}: {:?}/op ({reps} reps)", t.elapsed() / reps as u32);
    }
}
