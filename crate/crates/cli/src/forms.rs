//! Bilinear forms by length: the built-in short forms, the bundled files
//! for lengths 4, 5, 7, 8 and 9, and products of coprime lengths.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use cfft_core::conv::{agarwal_cooley, builtin_form, naive_bilinear};
use cfft_core::BilinearForm;

use crate::error::{CliError, Result};
use crate::formats::{parse_form, read_text};

const BUNDLED: [(&str, &str); 5] = [
    ("cyclic_4.txt", include_str!("../../../forms/cyclic_4.txt")),
    ("cyclic_5.txt", include_str!("../../../forms/cyclic_5.txt")),
    ("cyclic_7.txt", include_str!("../../../forms/cyclic_7.txt")),
    ("cyclic_8.txt", include_str!("../../../forms/cyclic_8.txt")),
    ("cyclic_9.txt", include_str!("../../../forms/cyclic_9.txt")),
];

/// Lengths assembled from two coprime factors.
const PRODUCTS: [(usize, usize); 2] = [(2, 3), (2, 5)];

#[derive(Debug, Clone, Default)]
pub struct FormLibrary {
    forms: BTreeMap<usize, BilinearForm>,
    allow_naive: bool,
}

impl FormLibrary {
    pub fn empty() -> Self {
        Self::default()
    }

    fn builtin() -> Self {
        let mut lib = Self::empty();
        for len in 1..=3 {
            lib.insert(builtin_form(len).expect("built-in length"));
        }
        lib
    }

    /// Built-in, bundled and product forms.
    pub fn bundled() -> Self {
        let mut lib = Self::builtin();
        for (name, text) in BUNDLED {
            lib.insert(parse_form(Path::new(name), text).expect("bundled forms are valid"));
        }
        lib.fill_products();
        lib
    }

    /// The built-in short forms plus every `cyclic_<len>.txt` in `dir`,
    /// in place of the bundled files.
    pub fn with_dir(dir: &Path) -> Result<Self> {
        let mut lib = Self::builtin();
        let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("cyclic_") && n.ends_with(".txt"))
            })
            .collect();
        paths.sort();
        for path in paths {
            let form = parse_form(&path, &read_text(&path)?)?;
            lib.insert(form);
        }
        lib.fill_products();
        Ok(lib)
    }

    pub fn allow_naive(mut self, yes: bool) -> Self {
        self.allow_naive = yes;
        self
    }

    pub fn insert(&mut self, form: BilinearForm) {
        self.forms.insert(form.length(), form);
    }

    fn fill_products(&mut self) {
        for (a, b) in PRODUCTS {
            if self.forms.contains_key(&(a * b)) {
                continue;
            }
            if let (Some(fa), Some(fb)) = (self.forms.get(&a), self.forms.get(&b)) {
                let f = agarwal_cooley(fa, fb).expect("coprime factors");
                self.insert(f);
            }
        }
    }

    pub fn get(&self, length: usize) -> Option<&BilinearForm> {
        self.forms.get(&length)
    }

    /// One form per requested length. Missing lengths fall back to the naive
    /// form only when allowed.
    pub fn select(&self, lengths: impl IntoIterator<Item = usize>) -> Result<BTreeMap<usize, BilinearForm>> {
        let mut out = BTreeMap::new();
        for len in lengths {
            let form = match self.forms.get(&len) {
                Some(f) => f.clone(),
                None if self.allow_naive => naive_bilinear(len),
                None => return Err(CliError::MissingForm(len)),
            };
            out.insert(len, form);
        }
        Ok(out)
    }

    /// True when every requested length has a stored (non-naive) form.
    pub fn covers(&self, lengths: impl IntoIterator<Item = usize>) -> bool {
        lengths.into_iter().all(|l| self.forms.contains_key(&l))
    }

    pub fn lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.forms.keys().copied()
    }
}
