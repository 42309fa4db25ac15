use rand::Rng;

use crate::{Error, Result};

/// `n` items drawn uniformly with replacement from the items `user` has not
/// interacted with. `interacted` must be sorted.
pub fn sample_negatives(
    interacted: &[usize],
    n_items: usize,
    user: usize,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<usize>> {
    let free = n_items.saturating_sub(interacted.len());
    if free == 0 {
        return Err(Error::NoNegatives { user });
    }
    let mut out = Vec::with_capacity(n);
    if interacted.len() * 2 <= n_items {
        while out.len() < n {
            let j = rng.random_range(0..n_items);
            if interacted.binary_search(&j).is_err() {
                out.push(j);
            }
        }
    } else {
        for _ in 0..n {
            out.push(nth_free(interacted, rng.random_range(0..free)));
        }
    }
    Ok(out)
}

/// The `r`-th (0-based) item not in the sorted list `taken`.
fn nth_free(taken: &[usize], r: usize) -> usize {
    let mut x = r;
    for &t in taken {
        if t <= x {
            x += 1;
        } else {
            break;
        }
    }
    x
}
