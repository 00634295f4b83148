use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Generator kinds.  The derived order is the tie-break inside a level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Ghost,
    Antighost,
    /// Shifted coordinate vector field of a polyvector table.
    Vector,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub kind: Kind,
    pub level: u32,
    /// Index within its (kind, level) family, zero based.
    pub index: usize,
    pub degree: i64,
}

impl Generator {
    fn new(kind: Kind, level: u32, index: usize) -> Self {
        let (name, degree) = match kind {
            Kind::Ghost => (format!("g{}_{}", level, index + 1), level as i64),
            Kind::Antighost => (format!("a{}_{}", level, index + 1), -(level as i64)),
            Kind::Vector => (format!("d{}", index + 1), 1),
        };
        Generator { name, kind, level, index, degree }
    }

    pub fn is_odd(&self) -> bool {
        self.degree.rem_euclid(2) == 1
    }
}

/// Declared generators with their canonical order.
///
/// Base coordinates are even and come first; graded generators follow sorted
/// by `(level, kind, index)`.
#[derive(Clone, Debug)]
pub struct GeneratorTable {
    base_dim: usize,
    gens: Vec<Generator>,
    odd: Vec<bool>,
    lookup: HashMap<(Kind, u32, usize), usize>,
}

impl PartialEq for GeneratorTable {
    fn eq(&self, other: &Self) -> bool {
        self.base_dim == other.base_dim && self.gens == other.gens
    }
}

impl Eq for GeneratorTable {}

impl GeneratorTable {
    /// `families` lists `(kind, level, count)`.
    pub fn new(base_dim: usize, families: &[(Kind, u32, usize)]) -> Result<Arc<Self>> {
        let mut gens = Vec::new();
        for &(kind, level, count) in families {
            if level == 0 {
                return Err(Error::Argument("generator level must be at least 1".into()));
            }
            if kind == Kind::Vector && level != 1 {
                return Err(Error::Argument("vector generators live at level 1".into()));
            }
            for index in 0..count {
                gens.push(Generator::new(kind, level, index));
            }
        }
        gens.sort_by_key(|g| (g.level, g.kind, g.index));
        for w in gens.windows(2) {
            if (w[0].level, w[0].kind, w[0].index) == (w[1].level, w[1].kind, w[1].index) {
                return Err(Error::Argument(format!("generator {} declared twice", w[0].name)));
            }
        }
        let odd = gens.iter().map(|g| g.is_odd()).collect();
        let lookup = gens.iter().enumerate().map(|(i, g)| ((g.kind, g.level, g.index), i)).collect();
        Ok(Arc::new(GeneratorTable { base_dim, gens, odd, lookup }))
    }

    /// Polynomials in `n` even coordinates.
    pub fn base(n: usize) -> Arc<Self> {
        Self::new(n, &[]).expect("valid table")
    }

    /// Koszul complex: `l` level-one antighosts.
    pub fn koszul(n: usize, l: usize) -> Arc<Self> {
        Self::new(n, &[(Kind::Antighost, 1, l)]).expect("valid table")
    }

    /// Classical/quantum BRST algebra: `l` ghosts and `l` antighosts of level one.
    pub fn brst(n: usize, l: usize) -> Arc<Self> {
        Self::new(n, &[(Kind::Ghost, 1, l), (Kind::Antighost, 1, l)]).expect("valid table")
    }

    /// Level counts `counts[j-1]` for levels `j = 1..`, antighosts always,
    /// matching ghosts when `ghosts` is set.
    pub fn levels(n: usize, counts: &[usize], ghosts: bool) -> Arc<Self> {
        let mut fam = Vec::new();
        for (j, &c) in counts.iter().enumerate() {
            fam.push((Kind::Antighost, j as u32 + 1, c));
            if ghosts {
                fam.push((Kind::Ghost, j as u32 + 1, c));
            }
        }
        Self::new(n, &fam).expect("valid table")
    }

    /// Polyvector fields on `n` coordinates.
    pub fn polyvector(n: usize) -> Arc<Self> {
        Self::new(n, &[(Kind::Vector, 1, n)]).expect("valid table")
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn n_gens(&self) -> usize {
        self.gens.len()
    }

    pub fn width(&self) -> usize {
        self.base_dim + self.gens.len()
    }

    pub fn gens(&self) -> &[Generator] {
        &self.gens
    }

    pub fn gen(&self, g: usize) -> &Generator {
        &self.gens[g]
    }

    pub fn is_odd(&self, g: usize) -> bool {
        self.odd[g]
    }

    pub fn find(&self, kind: Kind, level: u32, index: usize) -> Option<usize> {
        self.lookup.get(&(kind, level, index)).copied()
    }

    pub fn ghost(&self, level: u32, index: usize) -> Option<usize> {
        self.find(Kind::Ghost, level, index)
    }

    pub fn antighost(&self, level: u32, index: usize) -> Option<usize> {
        self.find(Kind::Antighost, level, index)
    }

    /// Number of generators of a kind at a level.
    pub fn count(&self, kind: Kind, level: u32) -> usize {
        self.gens.iter().filter(|g| g.kind == kind && g.level == level).count()
    }

    pub fn max_level(&self) -> u32 {
        self.gens.iter().map(|g| g.level).max().unwrap_or(0)
    }

    pub fn has_kind(&self, kind: Kind) -> bool {
        self.gens.iter().any(|g| g.kind == kind)
    }

    pub fn base_name(&self, i: usize) -> String {
        format!("x{}", i + 1)
    }

    /// Index of a generator by printed name.
    pub fn by_name(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    /// Same generator set, with ghosts added to every antighost family.
    pub fn with_ghosts(&self) -> Arc<Self> {
        let max = self.max_level();
        let counts: Vec<usize> = (1..=max).map(|j| self.count(Kind::Antighost, j)).collect();
        Self::levels(self.base_dim, &counts, true)
    }
}

impl fmt::Display for GeneratorTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "base {}", self.base_dim)?;
        for g in &self.gens {
            write!(f, " {}[{}]", g.name, g.degree)?;
        }
        Ok(())
    }
}
