use std::collections::HashMap;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use tollgate_core::engine::Clock;
use tollgate_core::OwnerId;

/// Unix seconds.
#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Admin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub token: String,
    pub role: Role,
    /// `None` for the admin.
    pub owner_id: Option<OwnerId>,
    /// Unix seconds.
    pub expires_at: u64,
}

pub(crate) fn random_token() -> String {
    let mut bytes = [0u8; 24];
    rand::thread_rng().fill_bytes(&mut bytes);
    hex::encode(bytes)
}

#[derive(Debug, Default)]
pub(crate) struct Sessions {
    by_token: HashMap<String, Session>,
}

impl Sessions {
    pub fn open(&mut self, role: Role, owner_id: Option<OwnerId>, expires_at: u64) -> Session {
        let s = Session {
            token: random_token(),
            role,
            owner_id,
            expires_at,
        };
        self.by_token.insert(s.token.clone(), s.clone());
        s
    }

    /// Live session for the token; expired ones are dropped on sight.
    pub fn get(&mut self, token: &str, now: u64) -> Option<Session> {
        match self.by_token.get(token) {
            Some(s) if s.expires_at > now => Some(s.clone()),
            Some(_) => {
                self.by_token.remove(token);
                None
            }
            None => None,
        }
    }

    pub fn close(&mut self, token: &str) {
        self.by_token.remove(token);
    }

    pub fn revoke_owner(&mut self, owner: OwnerId) {
        self.by_token.retain(|_, s| s.owner_id != Some(owner));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expiry_and_revocation() {
        let mut s = Sessions::default();
        let a = s.open(Role::User, Some(OwnerId(1)), 100);
        let b = s.open(Role::User, Some(OwnerId(2)), 100);
        assert!(s.get(&a.token, 99).is_some());
        assert!(s.get(&a.token, 100).is_none());
        assert!(s.get(&a.token, 50).is_none(), "expired sessions stay gone");
        s.revoke_owner(OwnerId(2));
        assert!(s.get(&b.token, 0).is_none());
        assert_ne!(a.token, b.token);
    }
}
