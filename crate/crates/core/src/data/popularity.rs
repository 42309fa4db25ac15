use super::Interaction;

/// Distinct frequency values, ascending; a value's position is its category.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FreqVocab {
    values: Vec<usize>,
}

impl FreqVocab {
    pub fn from_counts(counts: &[usize]) -> Self {
        let mut values = counts.to_vec();
        values.sort_unstable();
        values.dedup();
        Self { values }
    }

    /// Builds a vocabulary from explicit values (must be strictly ascending).
    pub fn from_values(values: Vec<usize>) -> crate::Result<Self> {
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(crate::Error::InvalidArgument(
                "frequency vocabulary must be strictly ascending".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn exact(&self, freq: usize) -> Option<usize> {
        self.values.binary_search(&freq).ok()
    }

    /// Category of `freq`; an unseen frequency falls back to the nearest
    /// observed one, ties going to the smaller frequency.
    pub fn category(&self, freq: usize) -> usize {
        match self.values.binary_search(&freq) {
            Ok(c) => c,
            Err(0) => 0,
            Err(pos) if pos == self.values.len() => pos - 1,
            Err(pos) => {
                let below = freq - self.values[pos - 1];
                let above = self.values[pos] - freq;
                if below <= above {
                    pos - 1
                } else {
                    pos
                }
            }
        }
    }
}

/// Training-partition degrees `d_u`, `d_i` and their category vocabularies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopularityTable {
    pub user_pop: Vec<usize>,
    pub item_pop: Vec<usize>,
    pub user_freq_vocab: FreqVocab,
    pub item_freq_vocab: FreqVocab,
}

impl PopularityTable {
    pub fn user_category(&self, u: usize) -> usize {
        self.user_freq_vocab.category(self.user_pop[u])
    }

    pub fn item_category(&self, i: usize) -> usize {
        self.item_freq_vocab.category(self.item_pop[i])
    }

    pub fn user_categories(&self) -> Vec<usize> {
        (0..self.user_pop.len()).map(|u| self.user_category(u)).collect()
    }

    pub fn item_categories(&self) -> Vec<usize> {
        (0..self.item_pop.len()).map(|i| self.item_category(i)).collect()
    }

    pub fn n_users(&self) -> usize {
        self.user_pop.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_pop.len()
    }
}

/// Counts `d_u` and `d_i` over `train`. Entities absent from `train` get
/// count 0, which then appears in the vocabulary.
pub fn build_popularity_table(
    train: &[Interaction],
    n_users: usize,
    n_items: usize,
) -> crate::Result<PopularityTable> {
    let mut user_pop = vec![0; n_users];
    let mut item_pop = vec![0; n_items];
    for it in train {
        super::check_index("user", it.user, n_users)?;
        super::check_index("item", it.item, n_items)?;
        user_pop[it.user] += 1;
        item_pop[it.item] += 1;
    }
    Ok(PopularityTable {
        user_freq_vocab: FreqVocab::from_counts(&user_pop),
        item_freq_vocab: FreqVocab::from_counts(&item_pop),
        user_pop,
        item_pop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_counts() {
        let train = [Interaction::new(0, 0), Interaction::new(0, 1), Interaction::new(1, 0)];
        let t = build_popularity_table(&train, 2, 2).unwrap();
        assert_eq!(t.user_pop, vec![2, 1]);
        assert_eq!(t.item_pop, vec![2, 1]);
        assert_eq!(t.user_freq_vocab.values(), &[1, 2]);
    }

    #[test]
    fn shared_frequency_single_category() {
        let train: Vec<_> = (0..5).map(|u| Interaction::new(u, u % 2)).collect();
        let t = build_popularity_table(&train, 5, 3).unwrap();
        assert_eq!(t.user_freq_vocab.len(), 1);
        // item 2 never appears in train: category 0 exists for it
        assert_eq!(t.item_freq_vocab.values(), &[0, 2, 3]);
        assert_eq!(t.item_category(2), 0);
    }

    #[test]
    fn nearest_category_fallback() {
        let v = FreqVocab::from_values(vec![1, 4, 10]).unwrap();
        assert_eq!(v.category(0), 0);
        assert_eq!(v.category(2), 0);
        assert_eq!(v.category(3), 1);
        // tie between 4 and 10 at 7 goes to the smaller
        assert_eq!(v.category(7), 1);
        assert_eq!(v.category(8), 2);
        assert_eq!(v.category(99), 2);
        assert!(FreqVocab::from_values(vec![3, 3]).is_err());
    }

    #[test]
    fn out_of_range_index() {
        assert!(build_popularity_table(&[Interaction::new(3, 0)], 2, 2).is_err());
    }
}
