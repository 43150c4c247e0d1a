use bse_bench::mmio::{format_matrix_market, parse_matrix_market};
use faer::{c64, Mat};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

proptest! {
    #[test]
    fn text_round_trip_is_bit_exact(
        rows in 1usize..6,
        cols in 1usize..6,
        values in prop::collection::vec((finite(), finite()), 36),
    ) {
        let m = Mat::from_fn(rows, cols, |i, j| {
            let (re, im) = values[i * 6 + j];
            c64::new(re, im)
        });
        let back = parse_matrix_market(&format_matrix_market(m.as_ref())).unwrap();
        prop_assert_eq!(back.nrows(), rows);
        prop_assert_eq!(back.ncols(), cols);
        for i in 0..rows {
            for j in 0..cols {
                prop_assert_eq!(back[(i, j)].re.to_bits(), m[(i, j)].re.to_bits());
                prop_assert_eq!(back[(i, j)].im.to_bits(), m[(i, j)].im.to_bits());
            }
        }
    }
}
