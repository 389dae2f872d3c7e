//! Interned identifiers.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::{LazyLock, RwLock};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(u32);

struct Interner {
    ids: HashMap<&'static str, u32>,
    strs: Vec<&'static str>,
}

static INTERNER: LazyLock<RwLock<Interner>> = LazyLock::new(|| {
    RwLock::new(Interner {
        ids: HashMap::new(),
        strs: Vec::new(),
    })
});

impl Name {
    pub fn new(s: &str) -> Name {
        if let Some(&id) = INTERNER.read().unwrap().ids.get(s) {
            return Name(id);
        }
        let mut w = INTERNER.write().unwrap();
        if let Some(&id) = w.ids.get(s) {
            return Name(id);
        }
        // Identifiers live for the whole process; leaking keeps lookups lock-free of lifetimes.
        let leaked: &'static str = Box::leak(s.to_owned().into_boxed_str());
        let id = w.strs.len() as u32;
        w.strs.push(leaked);
        w.ids.insert(leaked, id);
        Name(id)
    }

    pub fn as_str(self) -> &'static str {
        INTERNER.read().unwrap().strs[self.0 as usize]
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name::new(s)
    }
}

/// Generates identifiers that avoid a reserved set: `base`, then `base_1`, `base_2`, ...
#[derive(Default)]
pub struct Fresh {
    used: HashSet<Name>,
}

impl Fresh {
    pub fn new(reserved: impl IntoIterator<Item = Name>) -> Fresh {
        Fresh {
            used: reserved.into_iter().collect(),
        }
    }

    pub fn name(&mut self, base: &str) -> Name {
        let mut candidate = Name::new(base);
        let mut k = 0;
        while self.used.contains(&candidate) {
            k += 1;
            candidate = Name::new(&format!("{}_{}", base, k));
        }
        self.used.insert(candidate);
        candidate
    }

    pub fn reserve(&mut self, n: Name) {
        self.used.insert(n);
    }
}

/// The environment name under which `last x` is visible inside a block.
pub fn last_name(x: Name) -> Name {
    Name::new(&format!("{}#last", x))
}
