use num::bigint::BigInt;
use num::traits::One;

/// n! as an exact integer.
pub fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// Multinomial coefficient (|k|)! / prod k_i!.
pub fn multinomial(k: &[u64]) -> BigInt {
    let total: u64 = k.iter().sum();
    let mut num = factorial(total as usize);
    for &ki in k {
        num /= factorial(ki as usize);
    }
    num
}

/// C(k, 2) = k(k-1)/2, the number of unordered pairs.
pub fn binom2(k: u64) -> u64 {
    k * k.saturating_sub(1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multinomial_basics() {
        assert_eq!(multinomial(&[2, 0, 0]), BigInt::from(1));
        assert_eq!(multinomial(&[1, 1, 0]), BigInt::from(2));
        // 6!/(3!2!1!) = 60
        assert_eq!(multinomial(&[3, 2, 1]), BigInt::from(60));
        assert_eq!(multinomial(&[]), BigInt::from(1));
    }

    #[test]
    fn pascal_style_recurrence() {
        // sum_j multinomial(k - delta_j) = multinomial(k), zero entries skipped
        let k = [3u64, 1, 2];
        let mut sum = BigInt::from(0);
        for j in 0..k.len() {
            if k[j] == 0 {
                continue;
            }
            let mut k2 = k;
            k2[j] -= 1;
            sum += multinomial(&k2);
        }
        assert_eq!(sum, multinomial(&k));
    }

    #[test]
    fn binom2_small() {
        assert_eq!(binom2(0), 0);
        assert_eq!(binom2(1), 0);
        assert_eq!(binom2(2), 1);
        assert_eq!(binom2(5), 10);
    }
}
