//! Overlap lengths, areas and volumes between a unit cell and a translated
//! unit cell.

/// Length of `[0, 1] ∩ [a, b]`, zero when they are disjoint.
#[inline]
pub fn overlap_l(a: f64, b: f64) -> f64 {
    (b.min(1.0) - a.max(0.0)).max(0.0)
}

/// Area of the unit square intersected with the unit square translated by `(a, b)`.
#[inline]
pub fn overlap_a(a: f64, b: f64) -> f64 {
    overlap_l(a, 1.0 + a) * overlap_l(b, 1.0 + b)
}

/// Volume of the unit cube intersected with the unit cube translated by `(a, b, c)`.
#[inline]
pub fn overlap_v(a: f64, b: f64, c: f64) -> f64 {
    overlap_l(a, 1.0 + a) * overlap_l(b, 1.0 + b) * overlap_l(c, 1.0 + c)
}

/// Fraction of a donor cell displaced by `shift` cells that lands in the cell
/// `offset` positions away from it (receiver frame: donor sits at `-offset`).
#[inline]
pub(crate) fn donor_weight(offset_from_receiver: f64, shift: f64) -> f64 {
    let a = offset_from_receiver + shift;
    overlap_l(a, 1.0 + a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(overlap_l(0.0, 1.0), 1.0);
        assert_eq!(overlap_l(0.5, 1.5), 0.5);
        assert_eq!(overlap_l(-0.3, 0.7), 0.7);
        assert_eq!(overlap_l(1.2, 2.2), 0.0);
        assert_eq!(overlap_a(0.0, 0.0), 1.0);
        assert_eq!(overlap_a(0.5, 0.5), 0.25);
        assert_eq!(overlap_v(1.0, 0.0, 0.0), 0.0);
        assert_eq!(overlap_v(0.5, 0.5, 0.5), 0.125);
    }

    proptest! {
        #[test]
        fn donor_partition_is_exact(s in -1.0f64..=1.0) {
            // L(-1+s, s) + L(s, 1+s) + L(1+s, 2+s): the three receivers of one donor
            let total = overlap_l(-1.0 + s, s) + overlap_l(s, 1.0 + s) + overlap_l(1.0 + s, 2.0 + s);
            prop_assert_eq!(total, 1.0);
        }

        #[test]
        fn area_and_volume_partitions(a in -1.0f64..=1.0, b in -1.0f64..=1.0, c in -1.0f64..=1.0) {
            let mut area = 0.0;
            let mut vol = 0.0;
            for i in -1..=1 {
                for j in -1..=1 {
                    area += overlap_a(i as f64 + a, j as f64 + b);
                    for k in -1..=1 {
                        vol += overlap_v(i as f64 + a, j as f64 + b, k as f64 + c);
                    }
                }
            }
            prop_assert!((area - 1.0).abs() <= 4.0 * f64::EPSILON);
            prop_assert!((vol - 1.0).abs() <= 8.0 * f64::EPSILON);
        }

        #[test]
        fn overlap_bounds(a in -3.0f64..3.0, w in 0.0f64..3.0) {
            let l = overlap_l(a, a + w);
            prop_assert!(l >= 0.0 && l <= 1.0 && l <= w + 1e-15);
        }
    }
}
