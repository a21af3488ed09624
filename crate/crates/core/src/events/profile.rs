use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum AccountTag {
    #[default]
    User,
    Bot,
    Organization,
}

impl FromStr for AccountTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "" | "user" => Ok(AccountTag::User),
            "bot" => Ok(AccountTag::Bot),
            "organization" | "org" => Ok(AccountTag::Organization),
            other => Err(Error::format(format!("unknown account tag {other:?}"))),
        }
    }
}

impl fmt::Display for AccountTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccountTag::User => "User",
            AccountTag::Bot => "Bot",
            AccountTag::Organization => "Organization",
        })
    }
}

impl Serialize for AccountTag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AccountTag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Static account metadata.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AccountProfile {
    pub login: String,
    pub name: Option<String>,
    pub bio: Option<String>,
    pub email: Option<String>,
    #[serde(default)]
    pub tag: AccountTag,
    #[serde(default)]
    pub followers: u64,
    #[serde(default)]
    pub following: u64,
}

impl AccountProfile {
    /// Profile with nothing but a login, used for actors missing from the profile file.
    pub fn bare(login: impl Into<String>) -> Self {
        Self {
            login: login.into(),
            ..Default::default()
        }
    }
}

fn blank_to_none(v: Option<String>) -> Option<String> {
    v.filter(|s| !s.is_empty())
}

/// Reads a `login,name,bio,email,tag,followers,following` CSV.
pub fn read_profiles<R: Read>(reader: R) -> Result<BTreeMap<String, AccountProfile>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = BTreeMap::new();
    for row in rdr.deserialize::<AccountProfile>() {
        let mut p = row?;
        if p.login.is_empty() {
            return Err(Error::format("profile with empty login"));
        }
        p.name = blank_to_none(p.name);
        p.bio = blank_to_none(p.bio);
        p.email = blank_to_none(p.email);
        if out.contains_key(&p.login) {
            return Err(Error::format(format!("duplicate profile login {:?}", p.login)));
        }
        out.insert(p.login.clone(), p);
    }
    Ok(out)
}

pub fn write_profiles<'a, W: Write>(
    writer: W,
    profiles: impl IntoIterator<Item = &'a AccountProfile>,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(["login", "name", "bio", "email", "tag", "followers", "following"])?;
    for p in profiles {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}
