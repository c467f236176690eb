//! 4x4 integer core transform and scalar quantization.
//!
//! The forward transform is the exact integer product `W = C·X·Cᵀ`. The
//! multiplier and rescale tables are the position-dependent tables of
//! ITU-T H.264, indexed by `QP mod 6` and by coefficient class: both
//! indices even, both odd, or mixed.

use crate::{Error, Result};

pub type Block = [[i32; 4]; 4];
pub type Coefficients = [[i64; 4]; 4];

pub const MAX_QP: u8 = 51;

/// Integer core transform matrix.
pub const CORE: [[i64; 4]; 4] = [[1, 1, 1, 1], [2, 1, -1, -2], [1, -1, -1, 1], [1, -2, 2, -1]];

/// Forward multipliers `[even/even, odd/odd, mixed]` per `QP mod 6`.
pub const QUANT_MULTIPLIER: [[i64; 3]; 6] = [
    [13107, 5243, 8066],
    [11916, 4660, 7490],
    [10082, 4194, 6554],
    [9362, 3647, 5825],
    [8192, 3355, 5243],
    [7282, 2893, 4559],
];

/// Rescale factors `[even/even, odd/odd, mixed]` per `QP mod 6`.
pub const DEQUANT_SCALE: [[i64; 3]; 6] = [
    [10, 16, 13],
    [11, 18, 14],
    [13, 20, 16],
    [14, 23, 18],
    [16, 25, 20],
    [18, 29, 23],
];

#[inline]
pub fn coefficient_class(i: usize, j: usize) -> usize {
    match (i % 2, j % 2) {
        (0, 0) => 0,
        (1, 1) => 1,
        _ => 2,
    }
}

pub fn check_qp(qp: i32) -> Result<u8> {
    if (0..=MAX_QP as i32).contains(&qp) {
        Ok(qp as u8)
    } else {
        Err(Error::QpOutOfRange(qp))
    }
}

/// `W = C·X·Cᵀ` evaluated with butterflies.
pub fn dct4x4_forward(block: &Block) -> Coefficients {
    let mut tmp = [[0i64; 4]; 4];
    for (r, row) in block.iter().enumerate() {
        let x = row.map(i64::from);
        let (s03, d03, s12, d12) = (x[0] + x[3], x[0] - x[3], x[1] + x[2], x[1] - x[2]);
        tmp[r] = [s03 + s12, 2 * d03 + d12, s03 - s12, d03 - 2 * d12];
    }
    let mut out = [[0i64; 4]; 4];
    for c in 0..4 {
        let x = [tmp[0][c], tmp[1][c], tmp[2][c], tmp[3][c]];
        let (s03, d03, s12, d12) = (x[0] + x[3], x[0] - x[3], x[1] + x[2], x[1] - x[2]);
        out[0][c] = s03 + s12;
        out[1][c] = 2 * d03 + d12;
        out[2][c] = s03 - s12;
        out[3][c] = d03 - 2 * d12;
    }
    out
}

/// `Z = round(W·M / 2^(15 + ⌊QP/6⌋))`, rounding half away from zero.
pub fn quantize(w: &Coefficients, qp: i32) -> Result<Coefficients> {
    let qp = check_qp(qp)?;
    Ok(quantize_unchecked(w, qp))
}

pub(crate) fn quantize_unchecked(w: &Coefficients, qp: u8) -> Coefficients {
    let shift = 15 + u32::from(qp / 6);
    let half = 1i64 << (shift - 1);
    let mf = &QUANT_MULTIPLIER[usize::from(qp % 6)];
    let mut z = [[0i64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let v = w[i][j];
            let q = (v.abs() * mf[coefficient_class(i, j)] + half) >> shift;
            z[i][j] = if v < 0 { -q } else { q };
        }
    }
    z
}

/// Rescales by `V·2^⌊QP/6⌋`, applies the inverse core transform (with its
/// half-weight taps) and the final `(x + 32) >> 6`.
pub fn dequantize_and_inverse(z: &Coefficients, qp: i32) -> Result<Block> {
    let qp = check_qp(qp)?;
    Ok(dequantize_and_inverse_unchecked(z, qp))
}

pub(crate) fn dequantize_and_inverse_unchecked(z: &Coefficients, qp: u8) -> Block {
    let scale = &DEQUANT_SCALE[usize::from(qp % 6)];
    let shift = u32::from(qp / 6);
    let mut w = [[0i64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            w[i][j] = (z[i][j] * scale[coefficient_class(i, j)]) << shift;
        }
    }
    let inv = |d: [i64; 4]| {
        let e = d[0] + d[2];
        let f = d[0] - d[2];
        let g = (d[1] >> 1) - d[3];
        let h = d[1] + (d[3] >> 1);
        [e + h, f + g, f - g, e - h]
    };
    let mut tmp = [[0i64; 4]; 4];
    for r in 0..4 {
        tmp[r] = inv(w[r]);
    }
    let mut out = [[0i32; 4]; 4];
    for c in 0..4 {
        let col = inv([tmp[0][c], tmp[1][c], tmp[2][c], tmp[3][c]]);
        for r in 0..4 {
            out[r][c] = ((col[r] + 32) >> 6).clamp(i32::MIN as i64, i32::MAX as i64) as i32;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn matrix_product_oracle(x: &Block) -> Coefficients {
        let mut cx = [[0i64; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                cx[i][j] = (0..4).map(|k| CORE[i][k] * x[k][j] as i64).sum();
            }
        }
        let mut out = [[0i64; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = (0..4).map(|k| cx[i][k] * CORE[j][k]).sum();
            }
        }
        out
    }

    fn random_block(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> Block {
        std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(lo..=hi)))
    }

    #[test]
    fn zero_and_constant_blocks() {
        assert_eq!(dct4x4_forward(&[[0; 4]; 4]), [[0; 4]; 4]);
        let w = dct4x4_forward(&[[7; 4]; 4]);
        let mut expected = [[0i64; 4]; 4];
        expected[0][0] = 16 * 7;
        assert_eq!(w, expected);
    }

    #[test]
    fn quantize_scalar_examples() {
        let mut w = [[0i64; 4]; 4];
        for qp in [0, 17, 51] {
            assert_eq!(quantize(&w, qp).unwrap(), [[0; 4]; 4]);
        }
        w[0][0] = 16;
        assert_eq!(quantize(&w, 0).unwrap()[0][0], 6);
        w[0][0] = -16;
        assert_eq!(quantize(&w, 0).unwrap()[0][0], -6);
        assert!(matches!(quantize(&w, 52), Err(Error::QpOutOfRange(52))));
        assert!(quantize(&w, -1).is_err());
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        // 5·13107 / 2^15 = 1.99997 → 2; at QP 6 the shift is 16 → 0.99998 → 1
        let mut w = [[0i64; 4]; 4];
        w[0][0] = 5;
        assert_eq!(quantize(&w, 0).unwrap()[0][0], 2);
        assert_eq!(quantize(&w, 6).unwrap()[0][0], 1);
        // exact half: 2·8192 / 2^15 = 0.5 at QP 4
        w[0][0] = 2;
        assert_eq!(quantize(&w, 4).unwrap()[0][0], 1);
        w[0][0] = -2;
        assert_eq!(quantize(&w, 4).unwrap()[0][0], -1);
    }

    #[test]
    fn coarser_shift_never_grows_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let w = dct4x4_forward(&random_block(&mut rng, -2000, 2000));
            let (a, b) = (quantize(&w, 24).unwrap(), quantize(&w, 30).unwrap());
            for i in 0..4 {
                for j in 0..4 {
                    assert!(b[i][j].abs() <= a[i][j].abs());
                }
            }
        }
    }

    #[test]
    fn zero_coefficients_reconstruct_zero() {
        assert_eq!(dequantize_and_inverse(&[[0; 4]; 4], 30).unwrap(), [[0; 4]; 4]);
    }

    #[test]
    fn constant_block_round_trip_at_qp0() {
        let x = [[64; 4]; 4];
        let r = dequantize_and_inverse(&quantize(&dct4x4_forward(&x), 0).unwrap(), 0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((r[i][j] - 64).abs() <= 1);
            }
        }
    }

    #[test]
    fn distortion_grows_with_qp_on_fixed_corpus() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let corpus: Vec<Block> = (0..1000).map(|_| random_block(&mut rng, -512, 512)).collect();
        let mse = |qp: i32| {
            let mut err = 0.0;
            for x in &corpus {
                let r = dequantize_and_inverse(&quantize(&dct4x4_forward(x), qp).unwrap(), qp).unwrap();
                for i in 0..4 {
                    for j in 0..4 {
                        err += f64::from(r[i][j] - x[i][j]).powi(2);
                    }
                }
            }
            err / (corpus.len() * 16) as f64
        };
        let (m0, m20, m40) = (mse(0), mse(20), mse(40));
        assert!(m40 >= m20 && m20 >= m0, "{m0} {m20} {m40}");
    }

    proptest! {
        #[test]
        fn forward_matches_matrix_product(x in prop::array::uniform4(prop::array::uniform4(-32768i32..=32767))) {
            prop_assert_eq!(dct4x4_forward(&x), matrix_product_oracle(&x));
        }

        #[test]
        fn qp0_round_trip_within_one(x in prop::array::uniform4(prop::array::uniform4(-32768i32..=32767))) {
            let r = dequantize_and_inverse(&quantize(&dct4x4_forward(&x), 0).unwrap(), 0).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert!((r[i][j] - x[i][j]).abs() <= 1);
                }
            }
        }
    }
}
