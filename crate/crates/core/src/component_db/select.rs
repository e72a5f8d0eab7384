use serde::{Deserialize, Serialize};

/// Repository metadata as listed by a code host.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoMetadata {
    pub name: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub readme_text: String,
    #[serde(default)]
    pub star_count: u64,
}

fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_lowercase)
}

/// Names of repositories that look like libraries for the platform.
///
/// A platform keyword must occur (case-insensitively, as a substring) in the
/// title, tags or description. An exclusion keyword occurring as a whole
/// word anywhere in the metadata or readme disqualifies the repository, as
/// does a star count below `min_stars`. Output keeps input order.
pub fn select_tpls(repos: &[RepoMetadata], platform_keywords: &[String], exclusion_keywords: &[String], min_stars: u64) -> Vec<String> {
    let platform: Vec<String> = platform_keywords.iter().map(|k| k.to_lowercase()).filter(|k| !k.is_empty()).collect();
    let excluded: Vec<String> = exclusion_keywords.iter().map(|k| k.to_lowercase()).filter(|k| !k.is_empty()).collect();
    repos
        .iter()
        .filter(|r| r.star_count >= min_stars)
        .filter(|r| {
            let haystack = format!("{}\n{}\n{}", r.title, r.tags.join(" "), r.description).to_lowercase();
            platform.iter().any(|k| haystack.contains(k.as_str()))
        })
        .filter(|r| {
            let all = [r.name.as_str(), &r.title, &r.tags.join(" "), &r.description, &r.readme_text].join("\n");
            let hit = words(&all).any(|w| excluded.contains(&w));
            !hit
        })
        .map(|r| r.name.clone())
        .collect()
}
