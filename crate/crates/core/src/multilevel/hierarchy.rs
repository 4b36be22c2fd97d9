use crate::error::{Error, Result};

/// What a relaxation reports about its current iterate for coarsening.
#[derive(Debug, Clone)]
pub struct HierarchySeed<V> {
    /// Number of variables on the finest level.
    pub universe_size: usize,
    /// Sorted support of the current iterate.
    pub support: Vec<V>,
    /// Variables outside the support that may enter coarse levels, with the
    /// magnitude of their most recent gradient entry.
    pub candidates: Vec<(V, f64)>,
    /// Overrides the size of level 1 (before the support floor is applied).
    pub first_level_size: Option<usize>,
}

/// Nested variable sets `C_0 ⊃ C_1 ⊃ ... ⊃ C_L`.
///
/// Level 0 is the whole universe and is not stored; `levels[l - 1]` holds
/// `C_l` for `l >= 1`, each sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportHierarchy<V> {
    pub sizes: Vec<usize>,
    pub levels: Vec<Vec<V>>,
}

impl<V: Copy + Ord> SupportHierarchy<V> {
    /// Index of the coarsest level.
    pub fn depth(&self) -> usize {
        self.sizes.len() - 1
    }

    /// `None` on level 0 (no restriction), the stored set otherwise.
    pub fn level(&self, l: usize) -> Option<&[V]> {
        if l == 0 {
            None
        } else {
            Some(&self.levels[l - 1])
        }
    }
}

/// Builds the hierarchy by repeatedly keeping a fraction `ratio` of the
/// previous level: each coarse level is the support plus the candidates with
/// the largest magnitudes (ties broken by ascending variable). Coarsening
/// ends once a level equals the support.
pub fn build_hierarchy<V: Copy + Ord>(seed: &HierarchySeed<V>, ratio: f64) -> Result<SupportHierarchy<V>> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("coarsening ratio {ratio} outside (0, 1)")));
    }
    let supp = seed.support.len();
    let n = seed.universe_size;
    if supp > n {
        return Err(Error::InvalidArgument("support larger than the universe".into()));
    }
    let mut ranked: Vec<(V, f64)> = seed.candidates.clone();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.dedup_by(|a, b| a.0 == b.0);

    let mut sizes = vec![n];
    let trivial = supp == n || (supp == 0 && ranked.iter().all(|c| c.1 == 0.0));
    if !trivial {
        let reachable = supp + ranked.len();
        let mut current = n;
        loop {
            let proposed = if sizes.len() == 1 {
                seed.first_level_size
                    .unwrap_or_else(|| (current as f64 * ratio).ceil() as usize)
            } else {
                (current as f64 * ratio).ceil() as usize
            };
            let next = proposed.min(current.saturating_sub(1)).min(reachable).max(supp);
            sizes.push(next);
            if next == supp {
                break;
            }
            current = next;
        }
    }

    let mut levels = Vec::with_capacity(sizes.len() - 1);
    for &size in &sizes[1..] {
        let mut set = seed.support.clone();
        set.extend(ranked.iter().take(size - supp).map(|c| c.0));
        set.sort_unstable();
        levels.push(set);
    }
    Ok(SupportHierarchy { sizes, levels })
}

/// Hierarchy over plain indices `0..grad_magnitudes.len()`.
pub fn build_index_hierarchy(
    grad_magnitudes: &[f64],
    supp: &[usize],
    ratio: f64,
) -> Result<SupportHierarchy<usize>> {
    let n = grad_magnitudes.len();
    let mut support = supp.to_vec();
    support.sort_unstable();
    support.dedup();
    if support.last().is_some_and(|&i| i >= n) {
        return Err(Error::InvalidArgument("support index outside the universe".into()));
    }
    let mut in_supp = vec![false; n];
    for &i in &support {
        in_supp[i] = true;
    }
    let candidates = (0..n)
        .filter(|&i| !in_supp[i])
        .map(|i| (i, grad_magnitudes[i].abs()))
        .collect();
    build_hierarchy(
        &HierarchySeed {
            universe_size: n,
            support,
            candidates,
            first_level_size: None,
        },
        ratio,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_variables() {
        let g: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let h = build_index_hierarchy(&g, &[0, 1], 0.5).unwrap();
        assert_eq!(h.sizes, vec![8, 4, 2]);
        assert_eq!(h.levels[0], vec![0, 1, 6, 7]);
        assert_eq!(h.levels[1], vec![0, 1]);
    }

    #[test]
    fn full_support_is_single_level() {
        let h = build_index_hierarchy(&[1.0; 5], &[0, 1, 2, 3, 4], 0.5).unwrap();
        assert_eq!(h.sizes, vec![5]);
        assert_eq!(h.depth(), 0);
    }

    #[test]
    fn hundred_variables() {
        let g: Vec<f64> = (0..100).map(|i| (i * 37 % 100) as f64).collect();
        let h = build_index_hierarchy(&g, &[3, 10, 20, 50, 99], 0.5).unwrap();
        assert_eq!(h.sizes, vec![100, 50, 25, 13, 7, 5]);
    }

    #[test]
    fn empty_support_zero_gradient() {
        let h = build_index_hierarchy(&[0.0; 6], &[], 0.5).unwrap();
        assert_eq!(h.sizes, vec![6]);
    }

    #[test]
    fn ties_prefer_lower_index() {
        let h = build_index_hierarchy(&[1.0; 8], &[7], 0.5).unwrap();
        assert_eq!(h.levels[0], vec![0, 1, 2, 7]);
    }

    #[test]
    fn first_level_override_respects_support_floor() {
        let seed = HierarchySeed {
            universe_size: 20,
            support: vec![0, 1, 2, 3, 4, 5],
            candidates: vec![(6, 1.0), (7, 2.0)],
            first_level_size: Some(4),
        };
        let h = build_hierarchy(&seed, 0.5).unwrap();
        assert_eq!(h.sizes, vec![20, 6]);
    }
}
