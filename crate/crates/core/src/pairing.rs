//! Cantor pairing on the naturals.
//!
//! `pair(x, y) = (x + y)(x + y + 1) / 2 + y`. It is a bijection `ℕ² → ℕ`,
//! strictly increasing in each argument. Every `⟨e, x⟩` in the crate
//! (jump entries, coded-model bit positions, D² requirement order) uses it.

/// Cantor pairing. Panics on overflow, which for `u128` needs arguments
/// above 2⁶³.
pub fn pair(x: u128, y: u128) -> u128 {
    let s = x.checked_add(y).expect("pairing overflow");
    let tri =
        if s % 2 == 0 { (s / 2).checked_mul(s + 1) } else { s.checked_mul((s + 1) / 2) }.expect("pairing overflow");
    tri.checked_add(y).expect("pairing overflow")
}

/// Checked variant of [`pair`].
pub fn try_pair(x: u128, y: u128) -> Option<u128> {
    let s = x.checked_add(y)?;
    let tri = if s % 2 == 0 { (s / 2).checked_mul(s.checked_add(1)?) } else { s.checked_mul((s + 1) / 2) }?;
    tri.checked_add(y)
}

/// Inverse of [`pair`].
pub fn unpair(z: u128) -> (u128, u128) {
    // largest w with w(w+1)/2 <= z
    let mut w = isqrt(z.saturating_mul(2));
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    let y = z - w * (w + 1) / 2;
    (w - y, y)
}

fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_values() {
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(1, 0), 1);
        assert_eq!(pair(0, 1), 2);
        assert_eq!(pair(2, 0), 3);
        assert_eq!(pair(1, 1), 4);
        assert_eq!(pair(0, 2), 5);
    }

    #[test]
    fn enumerates_every_natural_once() {
        let mut seen = vec![false; 5050];
        for s in 0..100u128 {
            for y in 0..=s {
                let z = pair(s - y, y) as usize;
                assert!(!seen[z]);
                seen[z] = true;
            }
        }
        assert!(seen.iter().all(|&b| b));
    }

    proptest! {
        #[test]
        fn unpair_inverts_pair(x in 0u128..1u128 << 40, y in 0u128..1u128 << 40) {
            prop_assert_eq!(unpair(pair(x, y)), (x, y));
        }

        #[test]
        fn pair_inverts_unpair(z in 0u128..1u128 << 80) {
            let (x, y) = unpair(z);
            prop_assert_eq!(pair(x, y), z);
        }
    }
}
