// SPDX-License-Identifier: Apache-2.0

//! Conjunctive search over navigator bars and article metadata.
//!
//! Queries are split on the exact connective `" and "` and every resulting
//! term must occur (case-insensitive substring) in the target. Candidates
//! come from a character-trigram inverted index and are then verified
//! against the full predicate together with the requester's rights.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::authz::Right;
use crate::error::{Error, Result};
use crate::ids::{ArticleId, DirectoryId, UserId};
use crate::par::{self, Execution};
use crate::registry::Registry;
use crate::tree::{article_url, NavigatorBar};

pub const CONNECTIVE: &str = " and ";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SearchMode {
    Dir,
    Key,
    MyDir,
    MyKey,
    MyAllDir,
}

impl SearchMode {
    pub const ALL: [SearchMode; 5] = [
        SearchMode::Dir,
        SearchMode::Key,
        SearchMode::MyDir,
        SearchMode::MyKey,
        SearchMode::MyAllDir,
    ];

    pub fn wire_name(self) -> &'static str {
        match self {
            SearchMode::Dir => "DIR",
            SearchMode::Key => "KEY",
            SearchMode::MyDir => "MY_DIR",
            SearchMode::MyKey => "MY_KEY",
            SearchMode::MyAllDir => "MY_ALL_DIR",
        }
    }

    /// Lenient parse for the search-box labels ("My DIR", "my key"):
    /// case-insensitive, spaces standing in for underscores.
    pub fn from_label(s: &str) -> Result<Self> {
        s.trim()
            .to_ascii_uppercase()
            .replace(' ', "_")
            .parse()
            .map_err(|_| Error::InvalidMode(s.to_string()))
    }

    /// Article modes return article links; the rest return directories.
    pub fn targets_articles(self) -> bool {
        matches!(self, SearchMode::Key | SearchMode::MyKey)
    }

    pub fn owner_only(self) -> bool {
        matches!(
            self,
            SearchMode::MyDir | SearchMode::MyKey | SearchMode::MyAllDir
        )
    }
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

impl FromStr for SearchMode {
    type Err = Error;

    /// Only the exact wire names.
    fn from_str(s: &str) -> Result<Self> {
        SearchMode::ALL
            .into_iter()
            .find(|m| m.wire_name() == s)
            .ok_or_else(|| Error::InvalidMode(s.to_string()))
    }
}

impl Serialize for SearchMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.wire_name())
    }
}

impl<'de> Deserialize<'de> for SearchMode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Splits raw search-box input into terms.
///
/// `"protocol and course"` gives `["protocol", "course"]`; words that merely
/// contain "and" (such as "android") are never split.
pub fn parse_query(raw: &str) -> Result<Vec<String>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(Error::EmptyQuery);
    }
    raw.split(CONNECTIVE)
        .map(|term| {
            let term = term.trim();
            if term.is_empty() {
                Err(Error::EmptyTerm)
            } else {
                Ok(term.to_string())
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    /// Lowercased terms. Empty only for a blank `MY_ALL_DIR` query, which
    /// lists every directory the requester owns.
    terms: Vec<String>,
    mode: SearchMode,
    requester: UserId,
}

impl Query {
    pub fn new(raw: &str, mode: SearchMode, requester: UserId) -> Result<Self> {
        let terms = if mode == SearchMode::MyAllDir && raw.trim().is_empty() {
            Vec::new()
        } else {
            parse_query(raw)?
                .into_iter()
                .map(|t| t.to_lowercase())
                .collect()
        };
        Ok(Self {
            terms,
            mode,
            requester,
        })
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn mode(&self) -> SearchMode {
        self.mode
    }

    pub fn requester(&self) -> UserId {
        self.requester
    }

    fn matches(&self, haystack: &str) -> bool {
        self.terms.iter().all(|t| haystack.contains(t.as_str()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub bar: NavigatorBar,
    /// Present exactly for article hits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub article_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReindexScope {
    Full,
    Directory(DirectoryId),
    Article(ArticleId),
}

type Gram = [char; 3];

fn grams(text: &str) -> impl Iterator<Item = Gram> + '_ {
    let chars: Vec<char> = text.chars().collect();
    (0..chars.len().saturating_sub(2)).map(move |i| [chars[i], chars[i + 1], chars[i + 2]])
}

/// Trigram postings from lowercased text to document ids.
#[derive(Clone, Debug)]
struct Postings<K> {
    grams: HashMap<Gram, BTreeSet<K>>,
    docs: HashMap<K, Vec<Gram>>,
}

impl<K> Default for Postings<K> {
    fn default() -> Self {
        Self {
            grams: HashMap::new(),
            docs: HashMap::new(),
        }
    }
}

impl<K: Ord + Copy + std::hash::Hash> Postings<K> {
    fn insert(&mut self, key: K, texts: &[&str]) {
        self.remove(key);
        let mut doc: Vec<Gram> = texts.iter().flat_map(|t| grams(t)).collect();
        doc.sort_unstable();
        doc.dedup();
        for g in &doc {
            self.grams.entry(*g).or_default().insert(key);
        }
        self.docs.insert(key, doc);
    }

    fn remove(&mut self, key: K) {
        if let Some(doc) = self.docs.remove(&key) {
            for g in doc {
                if let Some(set) = self.grams.get_mut(&g) {
                    set.remove(&key);
                    if set.is_empty() {
                        self.grams.remove(&g);
                    }
                }
            }
        }
    }

    /// Documents containing every trigram of every term. `None` means the
    /// terms carry no trigram, so every document is a candidate.
    fn candidates(&self, terms: &[String]) -> Option<Vec<K>> {
        let mut wanted: Vec<Gram> = terms.iter().flat_map(|t| grams(t)).collect();
        if wanted.is_empty() {
            return None;
        }
        wanted.sort_unstable();
        wanted.dedup();
        let mut sets = Vec::with_capacity(wanted.len());
        for g in &wanted {
            match self.grams.get(g) {
                Some(set) => sets.push(set),
                None => return Some(Vec::new()),
            }
        }
        sets.sort_by_key(|s| s.len());
        let (first, rest) = sets.split_first().expect("non-empty");
        Some(
            first
                .iter()
                .filter(|k| rest.iter().all(|s| s.contains(k)))
                .copied()
                .collect(),
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct SearchIndex {
    dir_text: HashMap<DirectoryId, String>,
    dirs: Postings<DirectoryId>,
    article_text: HashMap<ArticleId, (String, String)>,
    articles: Postings<ArticleId>,
}

impl SearchIndex {
    pub fn directory_count(&self) -> usize {
        self.dir_text.len()
    }

    pub fn article_count(&self) -> usize {
        self.article_text.len()
    }
}

impl Registry {
    pub(crate) fn index_directory(&mut self, id: DirectoryId) {
        let Ok(bar) = self.navigator_path(id) else {
            self.unindex_directory(id);
            return;
        };
        let text = bar.to_string().to_lowercase();
        self.index.dirs.insert(id, &[&text]);
        self.index.dir_text.insert(id, text);
    }

    pub(crate) fn unindex_directory(&mut self, id: DirectoryId) {
        self.index.dirs.remove(id);
        self.index.dir_text.remove(&id);
    }

    pub(crate) fn index_article(&mut self, id: ArticleId) {
        let Some(article) = self.state.articles.get(&id) else {
            self.index.articles.remove(id);
            self.index.article_text.remove(&id);
            return;
        };
        let title = article.title.to_lowercase();
        let abstract_text = article.abstract_text.to_lowercase();
        self.index.articles.insert(id, &[&title, &abstract_text]);
        self.index.article_text.insert(id, (title, abstract_text));
    }

    pub(crate) fn rebuild_index(&mut self) {
        self.index = SearchIndex::default();
        let dirs: Vec<DirectoryId> = self.state.directories.keys().copied().collect();
        for id in dirs {
            self.index_directory(id);
        }
        let articles: Vec<ArticleId> = self.state.articles.keys().copied().collect();
        for id in articles {
            self.index_article(id);
        }
    }

    /// Brings the index back in line with the stored tree. Mutating
    /// operations already call this for what they touch.
    pub fn reindex(&mut self, scope: ReindexScope) {
        match scope {
            ReindexScope::Full => self.rebuild_index(),
            ReindexScope::Directory(id) => self.index_directory(id),
            ReindexScope::Article(id) => self.index_article(id),
        }
    }

    pub fn search_index(&self) -> &SearchIndex {
        &self.index
    }

    pub fn search(&self, query: &Query) -> Result<Vec<SearchHit>> {
        self.search_with(query, Execution::default())
    }

    pub fn search_with(&self, query: &Query, exec: Execution) -> Result<Vec<SearchHit>> {
        if query.mode.targets_articles() {
            Ok(self.search_articles(query, exec))
        } else {
            Ok(self.search_directories(query, exec))
        }
    }

    fn search_directories(&self, query: &Query, exec: Execution) -> Vec<SearchHit> {
        let candidates = self
            .index
            .dirs
            .candidates(&query.terms)
            .unwrap_or_else(|| self.index.dir_text.keys().copied().collect());
        let mut hits = par::filter_map(&candidates, exec, |id| {
            let dir = self.state.directories.get(id)?;
            if query.mode.owner_only() && dir.owner != query.requester {
                return None;
            }
            let text = self.index.dir_text.get(id)?;
            if !query.matches(text) || !self.is_live(*id) {
                return None;
            }
            if !self
                .check_right(query.requester, *id, Right::ShowDir)
                .ok()?
            {
                return None;
            }
            let bar = self.navigator_path(*id).ok()?;
            Some((bar.to_string(), *id, bar))
        });
        hits.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
        hits.into_iter()
            .map(|(_, _, bar)| SearchHit {
                bar,
                article_url: None,
                title: None,
            })
            .collect()
    }

    fn search_articles(&self, query: &Query, exec: Execution) -> Vec<SearchHit> {
        let candidates = self
            .index
            .articles
            .candidates(&query.terms)
            .unwrap_or_else(|| self.index.article_text.keys().copied().collect());
        let mut hits = par::filter_map(&candidates, exec, |id| {
            let article = self.state.articles.get(id)?;
            if query.mode.owner_only() && article.author != query.requester {
                return None;
            }
            let (title, abstract_text) = self.index.article_text.get(id)?;
            let all_terms = query
                .terms
                .iter()
                .all(|t| title.contains(t.as_str()) || abstract_text.contains(t.as_str()));
            let dir = article.directory;
            if !all_terms || !self.is_live(dir) {
                return None;
            }
            let roles = self.roles_of(query.requester, dir).ok()?;
            let matrix = self.state.directories.get(&dir)?.matrix;
            if !(matrix.allows(roles, Right::ShowDir) && matrix.allows(roles, Right::Read)) {
                return None;
            }
            let bar = self.navigator_path(dir).ok()?;
            Some((article.published_at, *id, article.title.clone(), bar))
        });
        hits.sort_by_key(|h| std::cmp::Reverse((h.0, h.1)));
        hits.into_iter()
            .map(|(_, id, title, bar)| SearchHit {
                bar,
                article_url: Some(article_url(id)),
                title: Some(title),
            })
            .collect()
    }
}
