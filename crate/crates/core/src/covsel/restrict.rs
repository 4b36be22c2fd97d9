/// Which matrix entries a relaxation may change.
#[derive(Debug, Clone, Copy)]
pub enum Restriction<'a> {
    All,
    /// Sorted upper pairs `(i, j)`, `i <= j`.
    Pairs(&'a [(usize, usize)]),
    /// Group label per variable; only pairs inside one group may move.
    Groups(&'a [usize]),
}

impl Restriction<'_> {
    pub fn is_all(&self) -> bool {
        matches!(self, Restriction::All)
    }

    pub fn allows(&self, i: usize, j: usize) -> bool {
        match self {
            Restriction::All => true,
            Restriction::Pairs(p) => p.binary_search(&(i.min(j), i.max(j))).is_ok(),
            Restriction::Groups(g) => g[i] == g[j],
        }
    }
}

/// Off-diagonal neighbors of every variable under a restriction.
pub(crate) enum Neighbors {
    All(usize),
    Lists(Vec<Vec<usize>>),
    Groups { label: Vec<usize>, members: Vec<Vec<usize>> },
}

impl Neighbors {
    pub(crate) fn new(n: usize, r: &Restriction<'_>) -> Self {
        match r {
            Restriction::All => Neighbors::All(n),
            Restriction::Pairs(p) => {
                let mut adj = vec![Vec::new(); n];
                for &(i, j) in p.iter() {
                    if i != j {
                        adj[i].push(j);
                        adj[j].push(i);
                    }
                }
                adj.iter_mut().for_each(|a| a.sort_unstable());
                Neighbors::Lists(adj)
            }
            Restriction::Groups(g) => {
                let count = g.iter().max().map_or(0, |m| m + 1);
                let mut members = vec![Vec::new(); count];
                for (v, &l) in g.iter().enumerate() {
                    members[l].push(v);
                }
                Neighbors::Groups {
                    label: g.to_vec(),
                    members,
                }
            }
        }
    }

    /// Rows `r != c` whose pair with `c` is allowed.
    pub(crate) fn of(&self, c: usize) -> Box<dyn Iterator<Item = usize> + '_> {
        match self {
            Neighbors::All(n) => Box::new((0..*n).filter(move |&r| r != c)),
            Neighbors::Lists(adj) => Box::new(adj[c].iter().copied()),
            Neighbors::Groups { label, members } => {
                Box::new(members[label[c]].iter().copied().filter(move |&r| r != c))
            }
        }
    }
}
