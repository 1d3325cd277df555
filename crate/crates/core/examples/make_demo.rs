//! Writes a small synthetic news corpus (articles plus comment threads) and a
//! matching config into the given directory (default `data/demo`).
//!
//!     cargo run --example make_demo -- data/demo

use std::fs;
use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const THEMES: [&[&str]; 5] = [
    &[
        "virus",
        "cases",
        "hospital",
        "patients",
        "infection",
        "symptoms",
        "doctors",
        "outbreak",
        "testing",
        "fever",
        "ward",
        "confirmed",
        "nurses",
        "masks",
        "clinic",
        "spread",
    ],
    &[
        "lockdown",
        "government",
        "policy",
        "restrictions",
        "travel",
        "border",
        "quarantine",
        "minister",
        "measures",
        "rules",
        "curfew",
        "officials",
        "ban",
        "announced",
        "province",
        "closure",
    ],
    &[
        "economy",
        "market",
        "jobs",
        "prices",
        "stocks",
        "trade",
        "business",
        "supply",
        "growth",
        "workers",
        "factory",
        "exports",
        "shares",
        "investors",
        "demand",
        "losses",
    ],
    &[
        "vaccine",
        "research",
        "trial",
        "scientists",
        "study",
        "laboratory",
        "genome",
        "antibodies",
        "data",
        "experts",
        "results",
        "dose",
        "approval",
        "samples",
        "journal",
        "findings",
    ],
    &[
        "school",
        "students",
        "online",
        "classes",
        "teachers",
        "exam",
        "parents",
        "campus",
        "learning",
        "university",
        "semester",
        "homework",
        "children",
        "lessons",
        "graduates",
        "courses",
    ],
];

const FILLER: &[&str] = &[
    "the", "a", "of", "and", "to", "in", "is", "that", "it", "for", "on", "was", "with", "as",
    "we", "this", "people", "said", "today", "week", "city", "country", "new", "also", "reported",
    "19", "2020",
];

fn sentence(rng: &mut ChaCha8Rng, theme: usize, len: usize) -> String {
    let words: Vec<&str> = (0..len)
        .map(|_| {
            if rng.random_bool(0.35) {
                *FILLER.choose(rng).unwrap()
            } else {
                // Earlier theme words are more frequent.
                let t = THEMES[theme];
                let i = ((rng.random::<f64>().powi(2)) * t.len() as f64) as usize;
                t[i.min(t.len() - 1)]
            }
        })
        .collect();
    let mut s = words.join(" ");
    s.push('.');
    s
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "data/demo".into()),
    );
    fs::create_dir_all(&dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2020);
    let mut articles = String::new();
    let mut comments = String::new();
    for news_id in 0..160u32 {
        let theme = rng.random_range(0..THEMES.len());
        let second = rng.random_range(0..THEMES.len());
        let text: Vec<String> = (0..rng.random_range(6..12))
            .map(|_| {
                let t = if rng.random_bool(0.8) { theme } else { second };
                let n = rng.random_range(8..16);
                sentence(&mut rng, t, n)
            })
            .collect();
        let day = 1 + news_id % 28;
        articles.push_str(&serde_json::to_string(&json!({
            "news_id": news_id,
            "title": format!("Report {news_id}"),
            "text": text.join(" "),
            "release_time": format!("2020-02-{day:02}T08:00:00"),
            "url": format!("https://news.example/{news_id}"),
        }))?);
        articles.push('\n');
        // Some threads drift: their comments mostly talk about another theme.
        let drift = rng.random_bool(0.25);
        let other = (theme + rng.random_range(1..THEMES.len())) % THEMES.len();
        for c in 0..rng.random_range(2..9) {
            let t = if drift == rng.random_bool(0.85) {
                other
            } else {
                theme
            };
            let n = rng.random_range(6..20);
            let body = sentence(&mut rng, t, n);
            comments.push_str(&serde_json::to_string(&json!({
                "news_id": news_id.to_string(),
                "raw_comment": body.to_uppercase(),
                "clean_comment": body,
                "date": format!("2020-02-{day:02}"),
                "is_reply": c > 0 && rng.random_bool(0.3),
                "username": format!("user{}", rng.random_range(0..400)),
            }))?);
            comments.push('\n');
        }
    }
    // A few lines the loader is expected to skip.
    articles.push_str("{\"news_id\": 9999, \"text\": \"\", \"release_time\": \"2020-03-01\"}\n");
    comments.push_str("not json\n");
    comments.push_str("{\"news_id\": 3, \"clean_comment\": \"no date here\"}\n");

    fs::write(dir.join("articles.jsonl"), articles)?;
    fs::write(dir.join("comments.jsonl"), comments)?;
    fs::write(
        dir.join("stopwords.txt"),
        "# extra stopwords, one per line\nsaid\npeople\nalso\n",
    )?;
    fs::write(
        dir.join("demo.toml"),
        r#"seed = 7

[input]
articles = "articles.jsonl"
comments = "comments.jsonl"
stopwords = "stopwords.txt"

[preprocess]
min_doc_freq = 2
split_ratio = 0.9

[lda]
num_topics = 5
iterations = 10
chunksize = 100
passes = 5

[analysis]
top_terms = 7
keywords = ["virus", "lockdown", "economy", "vaccine", "school", "masks"]

[inconsistency]
threshold = 0.6

[selection]
enabled = false
"#,
    )?;
    println!("wrote demo corpus to {}", dir.display());
    Ok(())
}
