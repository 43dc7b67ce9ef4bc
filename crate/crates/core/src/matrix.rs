//! Immutable sparse user-item ratings store.
//!
//! Built once from raw ratings, then shared read-only across worker threads.
//! Both index directions are kept: per-user item lists drive the similarity
//! kernels, per-item user lists exist for completeness and introspection.
//! All lists are sorted ascending so pairwise operations are linear merges.

use std::collections::BTreeMap;

use crate::error::{CfError, Result};
use crate::ingest::RawRating;

pub type UserId = u32;
pub type ItemId = u32;

#[derive(Debug, Clone, Default)]
pub struct RatingsMatrix {
    user_index: BTreeMap<UserId, Vec<(ItemId, f64)>>,
    item_index: BTreeMap<ItemId, Vec<(UserId, f64)>>,
    user_means: BTreeMap<UserId, f64>,
    global_mean: f64,
    n_ratings: usize,
}

impl RatingsMatrix {
    /// Builds both indexes from a deduplicated rating list. Input order is
    /// irrelevant; every per-user and per-item list ends up sorted ascending.
    pub fn build(ratings: &[RawRating]) -> Self {
        let mut user_index: BTreeMap<UserId, Vec<(ItemId, f64)>> = BTreeMap::new();
        let mut item_index: BTreeMap<ItemId, Vec<(UserId, f64)>> = BTreeMap::new();
        let mut total = 0.0;

        for r in ratings {
            user_index
                .entry(r.user_id)
                .or_default()
                .push((r.item_id, r.rating));
            item_index
                .entry(r.item_id)
                .or_default()
                .push((r.user_id, r.rating));
            total += r.rating;
        }
        for items in user_index.values_mut() {
            items.sort_unstable_by_key(|&(item, _)| item);
            debug_assert!(items.windows(2).all(|w| w[0].0 < w[1].0));
        }
        for users in item_index.values_mut() {
            users.sort_unstable_by_key(|&(user, _)| user);
            debug_assert!(users.windows(2).all(|w| w[0].0 < w[1].0));
        }

        let user_means = user_index
            .iter()
            .map(|(&user, items)| {
                let sum: f64 = items.iter().map(|&(_, r)| r).sum();
                (user, sum / items.len() as f64)
            })
            .collect();
        let n_ratings = ratings.len();
        let global_mean = if n_ratings == 0 {
            0.0
        } else {
            total / n_ratings as f64
        };

        RatingsMatrix {
            user_index,
            item_index,
            user_means,
            global_mean,
            n_ratings,
        }
    }

    pub fn n_users(&self) -> usize {
        self.user_index.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_index.len()
    }

    pub fn n_ratings(&self) -> usize {
        self.n_ratings
    }

    pub fn contains_user(&self, user: UserId) -> bool {
        self.user_index.contains_key(&user)
    }

    /// All user ids in ascending order.
    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.user_index.keys().copied()
    }

    /// Iterates (user id, rating row) pairs in ascending user order. The hot
    /// path for building similarity rows; avoids one map lookup per candidate.
    pub(crate) fn user_rows(&self) -> impl Iterator<Item = (UserId, &[(ItemId, f64)])> {
        self.user_index.iter().map(|(&u, v)| (u, v.as_slice()))
    }

    /// The user's (item, rating) list, ascending by item id.
    pub fn user_ratings(&self, user: UserId) -> Result<&[(ItemId, f64)]> {
        self.user_index
            .get(&user)
            .map(Vec::as_slice)
            .ok_or(CfError::UnknownUser(user))
    }

    /// The item's (user, rating) list, ascending by user id; `None` for an
    /// item nobody rated.
    pub fn item_ratings(&self, item: ItemId) -> Option<&[(UserId, f64)]> {
        self.item_index.get(&item).map(Vec::as_slice)
    }

    /// A single rating, if present.
    pub fn rating(&self, user: UserId, item: ItemId) -> Option<f64> {
        let items = self.user_index.get(&user)?;
        items
            .binary_search_by_key(&item, |&(i, _)| i)
            .ok()
            .map(|pos| items[pos].1)
    }

    /// Mean over the user's full rating history.
    pub fn user_mean(&self, user: UserId) -> Result<f64> {
        self.user_means
            .get(&user)
            .copied()
            .ok_or(CfError::UnknownUser(user))
    }

    /// Mean over every rating in the matrix; 0.0 for an empty matrix.
    pub fn global_mean(&self) -> f64 {
        self.global_mean
    }

    /// Items rated by both users with both ratings, ascending by item id.
    /// Computed as a linear merge of the two sorted rows.
    pub fn co_rated(&self, a: UserId, b: UserId) -> Result<Vec<(ItemId, f64, f64)>> {
        let ra = self.user_ratings(a)?;
        let rb = self.user_ratings(b)?;
        let mut out = Vec::new();
        merge_co_rated(ra, rb, |item, x, y| out.push((item, x, y)));
        Ok(out)
    }

    /// Intersection and union sizes of the two users' rated-item-id sets.
    /// Rating values are ignored entirely.
    pub fn user_item_sets(&self, a: UserId, b: UserId) -> Result<(usize, usize)> {
        let ra = self.user_ratings(a)?;
        let rb = self.user_ratings(b)?;
        Ok(item_set_counts(ra, rb))
    }
}

/// Walks two sorted rating rows in step, invoking `on_pair` for every item
/// rated by both. The first rating argument always comes from `a`.
pub(crate) fn merge_co_rated<F: FnMut(ItemId, f64, f64)>(
    a: &[(ItemId, f64)],
    b: &[(ItemId, f64)],
    mut on_pair: F,
) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (ia, ra) = a[i];
        let (ib, rb) = b[j];
        match ia.cmp(&ib) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                on_pair(ia, ra, rb);
                i += 1;
                j += 1;
            }
        }
    }
}

pub(crate) fn item_set_counts(a: &[(ItemId, f64)], b: &[(ItemId, f64)]) -> (usize, usize) {
    let (mut i, mut j) = (0, 0);
    let mut intersection = 0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                intersection += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - intersection;
    (intersection, union)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rating(user: UserId, item: ItemId, value: f64) -> RawRating {
        RawRating::new(user, item, value)
    }

    fn sample() -> RatingsMatrix {
        RatingsMatrix::build(&[
            rating(1, 1, 4.0),
            rating(1, 2, 3.0),
            rating(2, 2, 5.0),
            rating(2, 3, 1.0),
        ])
    }

    #[test]
    fn co_rated_is_the_sorted_intersection() {
        let m = sample();
        assert_eq!(m.co_rated(1, 2).unwrap(), vec![(2, 3.0, 5.0)]);
    }

    #[test]
    fn co_rated_disjoint_users_is_empty() {
        let m = RatingsMatrix::build(&[rating(1, 1, 4.0), rating(2, 2, 5.0)]);
        assert_eq!(m.co_rated(1, 2).unwrap(), vec![]);
    }

    #[test]
    fn co_rated_with_self_pairs_every_rating_with_itself() {
        let m = sample();
        assert_eq!(
            m.co_rated(1, 1).unwrap(),
            vec![(1, 4.0, 4.0), (2, 3.0, 3.0)]
        );
    }

    #[test]
    fn co_rated_swapped_arguments_swaps_rating_columns() {
        let m = sample();
        assert_eq!(m.co_rated(2, 1).unwrap(), vec![(2, 5.0, 3.0)]);
    }

    #[test]
    fn item_sets_count_intersection_and_union() {
        // {1,2,3} vs {2,3,4} -> (2, 4)
        let m = RatingsMatrix::build(&[
            rating(1, 1, 3.0),
            rating(1, 2, 3.0),
            rating(1, 3, 3.0),
            rating(2, 2, 3.0),
            rating(2, 3, 3.0),
            rating(2, 4, 3.0),
        ]);
        assert_eq!(m.user_item_sets(1, 2).unwrap(), (2, 4));
        assert_eq!(m.user_item_sets(2, 1).unwrap(), (2, 4));
    }

    #[test]
    fn item_sets_identical_sets_of_size_k() {
        let m = RatingsMatrix::build(&[
            rating(1, 1, 1.0),
            rating(1, 2, 2.0),
            rating(2, 1, 5.0),
            rating(2, 2, 4.0),
        ]);
        assert_eq!(m.user_item_sets(1, 2).unwrap(), (2, 2));
    }

    #[test]
    fn item_sets_against_empty_user_row() {
        // A user present in the matrix can't have zero items by construction,
        // so exercise the slice-level helper directly.
        let a: Vec<(ItemId, f64)> = vec![];
        let b = vec![(1, 3.0), (2, 4.0), (3, 5.0)];
        assert_eq!(item_set_counts(&a, &b), (0, 3));
    }

    #[test]
    fn user_mean_is_the_arithmetic_mean() {
        let m = RatingsMatrix::build(&[rating(1, 1, 4.0), rating(1, 2, 2.0)]);
        assert_eq!(m.user_mean(1).unwrap(), 3.0);
    }

    #[test]
    fn empty_build_has_no_users_or_items() {
        let m = RatingsMatrix::build(&[]);
        assert_eq!(m.n_users(), 0);
        assert_eq!(m.n_items(), 0);
        assert_eq!(m.n_ratings(), 0);
        assert_eq!(m.global_mean(), 0.0);
    }

    #[test]
    fn unknown_user_is_an_error() {
        let m = sample();
        assert!(matches!(m.co_rated(1, 99), Err(CfError::UnknownUser(99))));
        assert!(matches!(m.user_mean(99), Err(CfError::UnknownUser(99))));
    }

    #[test]
    fn rating_lookup_uses_the_sorted_row() {
        let m = sample();
        assert_eq!(m.rating(1, 2), Some(3.0));
        assert_eq!(m.rating(1, 3), None);
        assert_eq!(m.item_ratings(2).unwrap(), &[(1, 3.0), (2, 5.0)]);
    }
}
