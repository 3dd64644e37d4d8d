use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::PolyError;

/// Ordered list of distinct variable names shared by a family of polynomials.
///
/// Cloning is cheap; environments compare equal when their name lists agree.
#[derive(Clone)]
pub struct VarEnv {
    inner: Arc<EnvInner>,
}

struct EnvInner {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl VarEnv {
    pub fn new<I, S>(names: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(PolyError::DuplicateVariable(name.clone()));
            }
        }
        Ok(Self {
            inner: Arc::new(EnvInner { names, index }),
        })
    }

    pub fn len(&self) -> usize {
        self.inner.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.inner.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.inner.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.inner.index.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.inner.index.contains_key(name)
    }

    /// The same environment with the given names removed, order preserved.
    pub fn without<'a, I>(&self, removed: I) -> VarEnv
    where
        I: IntoIterator<Item = &'a str>,
    {
        let removed: std::collections::HashSet<&str> = removed.into_iter().collect();
        let names = self
            .names()
            .iter()
            .filter(|n| !removed.contains(n.as_str()))
            .cloned();
        VarEnv::new(names).expect("subset of distinct names is distinct")
    }
}

impl PartialEq for VarEnv {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.names == other.inner.names
    }
}

impl Eq for VarEnv {}

impl fmt::Debug for VarEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}
