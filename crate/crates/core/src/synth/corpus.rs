use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, Datelike, Duration, Utc, Weekday};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Normal, Poisson};

use super::names;
use super::{Archetype, BehaviorProfile, CorpusSpec, LogNormalSpec, Schedule};
use crate::dataset::{write_ground_truth, GroundTruth, LabelValue};
use crate::error::Result;
use crate::eval::derive_seed;
use crate::events::{write_archive, write_profiles, AccountProfile, AccountTag, Event, EventType, SECONDS_PER_DAY};
use crate::features::SubstringLexicon;

const SALT_IDENTITY: u64 = 11;
const SALT_ACTS: u64 = 12;
const SALT_RESOLVE: u64 = 13;
const REPO_ID_BASE: u64 = 100_000;
/// How far back a diffuse comment or merge looks for a thread to act on.
const RECENT_DAYS: i64 = 14;

/// A generated corpus: event stream, profiles and the true labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub events: Vec<Event>,
    pub profiles: Vec<AccountProfile>,
    pub truth: GroundTruth,
    pub archetypes: BTreeMap<String, Archetype>,
}

impl Corpus {
    pub fn write_events<W: Write>(&self, w: W) -> Result<()> {
        write_archive(w, &self.events)
    }

    pub fn write_profiles<W: Write>(&self, w: W) -> Result<()> {
        write_profiles(w, &self.profiles)
    }

    pub fn write_truth<W: Write>(&self, w: W) -> Result<()> {
        write_ground_truth(w, &self.truth)
    }

    /// Writes `events.jsonl`, `profiles.csv` and `labels.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let write = |name: &str, f: &dyn Fn(&mut BufWriter<File>) -> Result<()>| -> Result<()> {
            let mut w = BufWriter::new(File::create(dir.join(name))?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        };
        write("events.jsonl", &|w| self.write_events(w))?;
        write("profiles.csv", &|w| self.write_profiles(w))?;
        write("labels.csv", &|w| self.write_truth(w))
    }
}

struct Plan<'a> {
    login: String,
    behavior: &'a BehaviorProfile,
    repos: Vec<usize>,
    rate: f64,
    pref_hour: f64,
    mix: [f64; 7],
    template_probability: f64,
    /// Per-account response delay distribution (profile median rescaled).
    delay: LogNormalSpec,
    vocab: Vec<&'static str>,
}

/// Base weights of diffuse act kinds, in [`act_kind`] order.
const MIX: [f64; 7] = [0.08, 0.08, 0.40, 0.06, 0.28, 0.05, 0.05];
/// Background activity of triggered and weekly accounts: no comments or merges.
const BACKGROUND_MIX: [f64; 7] = [0.2, 0.3, 0.0, 0.0, 0.4, 0.1, 0.0];

fn act_kind(i: usize, rng: &mut ChaCha8Rng) -> ActKind {
    match i {
        0 => ActKind::OpenIssue,
        1 => ActKind::OpenPr,
        2 => ActKind::Comment,
        3 => ActKind::Merge,
        4 => ActKind::Push(rng.random_range(1..6)),
        5 => ActKind::Create,
        _ => ActKind::Watch,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ActKind {
    OpenIssue,
    OpenPr,
    Comment,
    Merge,
    Push(u64),
    Create,
    Watch,
    /// Comment on the thread opened by the act at this index.
    FollowUp(usize),
}

#[derive(Clone, Copy)]
struct Act {
    t: DateTime<Utc>,
    account: usize,
    repo: usize,
    kind: ActKind,
}

#[derive(Clone, Copy)]
struct ThreadInfo {
    opened: DateTime<Utc>,
    number: u64,
    is_pr: bool,
}

fn repo_id(r: usize) -> String {
    (REPO_ID_BASE + r as u64).to_string()
}

fn identity(
    behavior: &BehaviorProfile,
    rng: &mut ChaCha8Rng,
    lex: &SubstringLexicon,
    taken: &mut BTreeSet<String>,
) -> AccountProfile {
    let term = rng.random_bool(behavior.lexicon_probability);
    let human = behavior.archetype == Archetype::Human;
    let login = if human {
        names::human_login(rng, lex, term)
    } else {
        names::bot_login(rng, lex, term)
    };
    let login = names::unique(taken, login);
    let (name, bio, email) = if human {
        let name_term = term && rng.random_bool(0.5);
        let bio_term = term && rng.random_bool(0.5);
        let name = rng.random_bool(0.8).then(|| names::human_name(rng, lex, name_term));
        let bio = rng.random_bool(0.6).then(|| names::human_bio(rng, lex, bio_term));
        let email = rng.random_bool(0.5).then(|| format!("{login}@example.org"));
        (name, bio, email)
    } else {
        let name = rng.random_bool(0.5).then(|| names::bot_name(&login));
        let bio = rng.random_bool(0.5).then(|| names::bot_bio(rng, lex, term));
        let email = rng.random_bool(0.2).then(|| format!("noreply+{login}@example.org"));
        (name, bio, email)
    };
    let tag = if rng.random_bool(behavior.bot_tag_probability) {
        AccountTag::Bot
    } else {
        AccountTag::User
    };
    let (followers, following) = if rng.random_bool(behavior.zero_follow_probability) {
        (0, 0)
    } else {
        (behavior.followers.sample(rng), behavior.following.sample(rng))
    };
    AccountProfile {
        login,
        name,
        bio,
        email,
        tag,
        followers,
        following,
    }
}

fn is_weekend(t: DateTime<Utc>) -> bool {
    matches!(t.weekday(), Weekday::Sat | Weekday::Sun)
}

fn diffuse_acts(plan: &Plan, account: usize, spec: &CorpusSpec, rng: &mut ChaCha8Rng, out: &mut Vec<Act>) {
    let w = &spec.window;
    let hour = Normal::new(plan.pref_hour, 3.0).expect("finite");
    let pick = WeightedIndex::new(plan.mix).expect("positive weights");
    for d in 0..w.n_days() as i64 {
        let day = w.start + Duration::days(d);
        let factor = if is_weekend(day) { plan.behavior.weekend_factor } else { 1.0 };
        let lambda = plan.rate * factor;
        let n = if lambda > 0.0 {
            Poisson::new(lambda).map(|p| p.sample(rng) as u64).unwrap_or(0)
        } else {
            0
        };
        for _ in 0..n {
            let h = hour.sample(rng).rem_euclid(24.0);
            let offset = (h * 3600.0) as i64 + rng.random_range(0..60);
            let t = day + Duration::seconds(offset.min(SECONDS_PER_DAY - 1));
            let kind = act_kind(pick.sample(rng), rng);
            let repo = *plan.repos.choose(rng).expect("at least one repo");
            out.push(Act { t, account, repo, kind });
        }
    }
}

fn weekly_acts(plan: &Plan, account: usize, spec: &CorpusSpec, rng: &mut ChaCha8Rng, out: &mut Vec<Act>) {
    let w = &spec.window;
    let weekday = rng.random_range(0..7u32);
    let secs = rng.random_range(0..24 * 3600) as i64;
    let midnight = w.start.date_naive().and_hms_opt(0, 0, 0).expect("midnight").and_utc();
    let shift = (7 + weekday as i64 - midnight.weekday().num_days_from_monday() as i64) % 7;
    let mut t = midnight + Duration::days(shift) + Duration::seconds(secs);
    if t < w.start {
        t += Duration::days(7);
    }
    let repo = plan.repos[0];
    while t < w.end {
        let open = out.len();
        out.push(Act { t, account, repo, kind: ActKind::OpenIssue });
        let delay = plan.delay.sample(rng).max(1.0) as i64;
        out.push(Act {
            t: t + Duration::seconds(delay),
            account,
            repo,
            kind: ActKind::FollowUp(open),
        });
        t += Duration::days(7);
    }
}

fn render(plan: &Plan, number: u64, rng: &mut ChaCha8Rng) -> String {
    let b = plan.behavior;
    if b.comment_templates.is_empty() || !rng.random_bool(plan.template_probability) {
        return names::sentence(rng, &plan.vocab);
    }
    let tpl = b.comment_templates.choose(rng).expect("non-empty");
    let mut s = tpl
        .replace("{n}", &number.to_string())
        .replace("{id}", &names::hex_id(rng))
        .replace("{count}", &rng.random_range(0..40).to_string());
    if rng.random_bool(b.template_variability) {
        s.push(' ');
        s.push_str(names::VOCABULARY.choose(rng).expect("non-empty"));
    }
    s
}

/// Threads of `repo` opened in `[t - RECENT_DAYS, t)`.
fn recent(threads: &[ThreadInfo], t: DateTime<Utc>) -> &[ThreadInfo] {
    let lo = threads.partition_point(|x| x.opened < t - Duration::days(RECENT_DAYS));
    let hi = threads.partition_point(|x| x.opened < t);
    &threads[lo..hi]
}

/// Generates a corpus; identical specs give identical output.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Corpus> {
    spec.validate()?;
    let lex = SubstringLexicon::default();
    let n_repos = spec.n_repositories();

    let mut roster: Vec<&BehaviorProfile> = Vec::new();
    if spec.n_humans > 0 {
        let h = spec.behavior(Archetype::Human).expect("validated");
        roster.extend(std::iter::repeat_n(h, spec.n_humans));
    }
    for a in Archetype::BOTS {
        if spec.n_bots_per_archetype > 0 {
            let b = spec.behavior(a).expect("validated");
            roster.extend(std::iter::repeat_n(b, spec.n_bots_per_archetype));
        }
    }

    let mut taken = BTreeSet::new();
    let mut profiles = Vec::with_capacity(roster.len());
    let mut plans = Vec::with_capacity(roster.len());
    for (i, b) in roster.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, SALT_IDENTITY, i as u64));
        let profile = identity(b, &mut rng, &lex, &mut taken);
        let k = (b.repositories.sample(&mut rng) as usize).clamp(1, n_repos);
        let mut repos: Vec<usize> = rand::seq::index::sample(&mut rng, n_repos, k).into_vec();
        repos.sort_unstable();
        plans.push(Plan {
            login: profile.login.clone(),
            behavior: b,
            repos,
            rate: b.activity_rate.sample(&mut rng),
            pref_hour: rng.random_range(7.0..22.0),
            mix: {
                let base = if b.schedule == Schedule::Diffuse { MIX } else { BACKGROUND_MIX };
                let jitter = LogNormalSpec::new(1.0, b.mix_jitter);
                base.map(|w| w * jitter.sample(&mut rng))
            },
            template_probability: (b.template_probability
                * LogNormalSpec::new(1.0, b.mix_jitter).sample(&mut rng))
            .min(1.0),
            delay: LogNormalSpec::new(
                b.response_delay.median * LogNormalSpec::new(1.0, b.mix_jitter).sample(&mut rng),
                b.response_delay.sigma,
            ),
            vocab: {
                let k = (b.vocabulary_size.sample(&mut rng) as usize).clamp(1, names::VOCABULARY.len());
                let mut idx = rand::seq::index::sample(&mut rng, names::VOCABULARY.len(), k).into_vec();
                idx.sort_unstable();
                idx.into_iter().map(|i| names::VOCABULARY[i]).collect()
            },
        });
        profiles.push(profile);
    }

    let mut acts = Vec::new();
    for (i, plan) in plans.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, SALT_ACTS, i as u64));
        match plan.behavior.schedule {
            Schedule::Diffuse => diffuse_acts(plan, i, spec, &mut rng, &mut acts),
            Schedule::FixedWeekly => {
                weekly_acts(plan, i, spec, &mut rng, &mut acts);
                diffuse_acts(plan, i, spec, &mut rng, &mut acts);
            }
            Schedule::Triggered => diffuse_acts(plan, i, spec, &mut rng, &mut acts),
        }
    }
    acts.retain(|a| spec.window.contains(a.t));

    // number threads per repository in opening order
    let mut opens: Vec<usize> = (0..acts.len())
        .filter(|&i| matches!(acts[i].kind, ActKind::OpenIssue | ActKind::OpenPr))
        .collect();
    opens.sort_by_key(|&i| (acts[i].t, acts[i].account, i));
    let mut counters = vec![0u64; n_repos];
    let mut numbers: BTreeMap<usize, u64> = BTreeMap::new();
    let mut registry: Vec<Vec<ThreadInfo>> = vec![Vec::new(); n_repos];
    for &i in &opens {
        let a = acts[i];
        counters[a.repo] += 1;
        numbers.insert(i, counters[a.repo]);
        registry[a.repo].push(ThreadInfo {
            opened: a.t,
            number: counters[a.repo],
            is_pr: a.kind == ActKind::OpenPr,
        });
    }

    let mut rngs: Vec<ChaCha8Rng> = (0..plans.len())
        .map(|i| ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, SALT_RESOLVE, i as u64)))
        .collect();
    let mut events = Vec::with_capacity(acts.len() * 2);
    for (i, a) in acts.iter().enumerate() {
        let plan = &plans[a.account];
        let rng = &mut rngs[a.account];
        let repo = repo_id(a.repo);
        let ev = match a.kind {
            ActKind::OpenIssue => Event::new(&plan.login, repo, EventType::IssueOpen, a.t, numbers.get(&i).copied(), None, 0)?,
            ActKind::OpenPr => Event::new(&plan.login, repo, EventType::PullRequestOpen, a.t, numbers.get(&i).copied(), None, 0)?,
            ActKind::FollowUp(open) => {
                let Some(&n) = numbers.get(&open) else { continue };
                let text = render(plan, n, rng);
                Event::new(&plan.login, repo, EventType::IssueComment, a.t, Some(n), Some(text), 0)?
            }
            ActKind::Comment => {
                let reply = recent(&registry[a.repo], a.t).choose(rng).and_then(|th| {
                    let delay = plan.delay.sample(rng).max(1.0) as i64;
                    let t = th.opened + Duration::seconds(delay);
                    spec.window.contains(t).then_some((th, t))
                });
                match reply {
                    Some((th, t)) => {
                        let ty = if th.is_pr { EventType::PullRequestComment } else { EventType::IssueComment };
                        let text = render(plan, th.number, rng);
                        Event::new(&plan.login, repo, ty, t, Some(th.number), Some(text), 0)?
                    }
                    None => Event::new(&plan.login, repo, EventType::Push, a.t, None, None, 1)?,
                }
            }
            ActKind::Merge => {
                let prs: Vec<&ThreadInfo> = recent(&registry[a.repo], a.t).iter().filter(|t| t.is_pr).collect();
                match prs.choose(rng) {
                    Some(th) => Event::new(&plan.login, repo, EventType::PullRequestMerge, a.t, Some(th.number), None, 0)?,
                    None => Event::new(&plan.login, repo, EventType::Push, a.t, None, None, 1)?,
                }
            }
            ActKind::Push(c) => Event::new(&plan.login, repo, EventType::Push, a.t, None, None, c)?,
            ActKind::Create => Event::new(&plan.login, repo, EventType::Create, a.t, None, None, 0)?,
            ActKind::Watch => Event::new(&plan.login, repo, EventType::Other, a.t, None, None, 0)?,
        };
        events.push(ev);
    }

    for (i, plan) in plans.iter().enumerate() {
        if plan.behavior.schedule != Schedule::Triggered {
            continue;
        }
        let rng = &mut rngs[i];
        let b = plan.behavior;
        for &r in &plan.repos {
            for th in &registry[r] {
                if b.archetype == Archetype::CICD && !th.is_pr {
                    continue;
                }
                if !rng.random_bool(b.trigger_probability) {
                    continue;
                }
                let delay = plan.delay.sample(rng).max(1.0) as i64;
                let t = th.opened + Duration::seconds(delay);
                let text = render(plan, th.number, rng);
                if !spec.window.contains(t) {
                    continue;
                }
                let ty = if th.is_pr { EventType::PullRequestComment } else { EventType::IssueComment };
                events.push(Event::new(&plan.login, repo_id(r), ty, t, Some(th.number), Some(text), 0)?);
            }
        }
    }
    events.sort_by_key(|e| e.occurred_at);

    let mut truth = GroundTruth::new();
    let mut archetypes = BTreeMap::new();
    for plan in &plans {
        let a = plan.behavior.archetype;
        let value = if a == Archetype::Human { LabelValue::Human } else { LabelValue::Bot };
        truth.insert(plan.login.clone(), (value, a.category()));
        archetypes.insert(plan.login.clone(), a);
    }
    profiles.sort_by(|a, b| a.login.cmp(&b.login));
    Ok(Corpus {
        events,
        profiles,
        truth,
        archetypes,
    })
}
