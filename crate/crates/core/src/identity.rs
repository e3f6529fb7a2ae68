//! Contributor identity resolution.
//!
//! Non-stub names and emails are nodes of an undirected graph; every commit
//! signature links its name to its email. Each connected component is one
//! contributor.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ingest::{signature_key, LanguageConfig};

/// An author signature; the email is lowercased for matching.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    pub name: String,
    pub email: String,
}

impl Signature {
    pub fn new(name: &str, email: &str) -> Self {
        Self {
            name: name.trim().to_string(),
            email: email.trim().to_lowercase(),
        }
    }

    pub fn key(&self) -> String {
        signature_key(&self.name, &self.email)
    }

    /// Inverse of [`Signature::key`].
    pub fn from_key(key: &str) -> Option<Self> {
        let inner = key.strip_suffix('>')?;
        let open = inner.rfind('<')?;
        Some(Self::new(&inner[..open], &inner[open + 1..]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identity {
    pub id: u32,
    pub names: BTreeSet<String>,
    pub emails: BTreeSet<String>,
    /// Set for signatures whose name and email are both stubs.
    #[serde(skip)]
    pub stub: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdentityResolution {
    /// Sorted by id; `identities[i].id == i`.
    pub identities: Vec<Identity>,
    pub by_signature: BTreeMap<String, u32>,
}

impl IdentityResolution {
    pub fn resolve(&self, signature_key: &str) -> Option<u32> {
        self.by_signature.get(signature_key).copied()
    }

    pub fn get(&self, id: u32) -> Option<&Identity> {
        self.identities.get(id as usize)
    }

    pub fn stub_ids(&self) -> BTreeSet<u32> {
        self.identities
            .iter()
            .filter(|i| i.stub)
            .map(|i| i.id)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StubFlags {
    pub email: bool,
    pub name: bool,
}

/// Shell-style wildcard match supporting `*` and `?`.
fn wildcard_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0, 0);
    let mut backtrack: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '?' || p[pi] == t[ti]) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            backtrack = Some((pi, ti));
            pi += 1;
        } else if let Some((bp, bt)) = backtrack {
            pi = bp + 1;
            ti = bt + 1;
            backtrack = Some((bp, bt + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}

pub fn is_stub(sig: &Signature, config: &LanguageConfig) -> StubFlags {
    let email = sig.email.trim().to_lowercase();
    let name = sig.name.trim();
    StubFlags {
        email: email.is_empty()
            || config
                .stub_emails
                .iter()
                .any(|p| wildcard_match(&p.to_lowercase(), &email)),
        name: name.is_empty() || config.stub_names.contains(name),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Name(String),
    Email(String),
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn add(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

/// Merges signatures into identities. The result does not depend on the
/// order of `signatures`.
pub fn merge_identities(signatures: &[Signature], config: &LanguageConfig) -> IdentityResolution {
    let unique: BTreeSet<&Signature> = signatures.iter().collect();
    let mut uf = UnionFind { parent: Vec::new() };
    let mut nodes: BTreeMap<Node, usize> = BTreeMap::new();
    let mut stub_pairs: BTreeMap<&Signature, usize> = BTreeMap::new();
    let mut owner_of: BTreeMap<&Signature, usize> = BTreeMap::new();

    let mut node = |uf: &mut UnionFind, n: Node| *nodes.entry(n).or_insert_with(|| uf.add());
    for &sig in &unique {
        let stub = is_stub(sig, config);
        let slot = match (stub.name, stub.email) {
            (true, true) => *stub_pairs.entry(sig).or_insert_with(|| uf.add()),
            (false, true) => node(&mut uf, Node::Name(sig.name.clone())),
            (true, false) => node(&mut uf, Node::Email(sig.email.clone())),
            (false, false) => {
                let a = node(&mut uf, Node::Name(sig.name.clone()));
                let b = node(&mut uf, Node::Email(sig.email.clone()));
                uf.union(a, b);
                a
            }
        };
        owner_of.insert(sig, slot);
    }

    let mut components: BTreeMap<usize, (BTreeSet<String>, BTreeSet<String>, bool)> = BTreeMap::new();
    for (n, &slot) in &nodes {
        let entry = components.entry(uf.find(slot)).or_default();
        match n {
            Node::Name(name) => entry.0.insert(name.clone()),
            Node::Email(email) => entry.1.insert(email.clone()),
        };
    }
    for (sig, &slot) in &stub_pairs {
        let entry = components.entry(uf.find(slot)).or_default();
        if !sig.name.is_empty() {
            entry.0.insert(sig.name.clone());
        }
        if !sig.email.is_empty() {
            entry.1.insert(sig.email.clone());
        }
        entry.2 = true;
    }

    let mut ordered: Vec<(Vec<String>, usize)> = components
        .iter()
        .map(|(&root, (names, emails, _))| {
            let mut members: Vec<String> = names.iter().chain(emails).cloned().collect();
            members.sort();
            (members, root)
        })
        .collect();
    ordered.sort();

    let mut id_of_root = BTreeMap::new();
    let mut identities = Vec::with_capacity(ordered.len());
    for (id, (_, root)) in ordered.into_iter().enumerate() {
        let (names, emails, stub) = components.remove(&root).expect("component");
        id_of_root.insert(root, id as u32);
        identities.push(Identity {
            id: id as u32,
            names,
            emails,
            stub,
        });
    }

    let by_signature = owner_of
        .into_iter()
        .map(|(sig, slot)| (sig.key(), id_of_root[&uf.find(slot)]))
        .collect();
    IdentityResolution {
        identities,
        by_signature,
    }
}
