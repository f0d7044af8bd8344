use sha2::{Digest, Sha256};

/// Password hashing is pluggable; the model only stores opaque strings.
pub trait PasswordHasher: Send + Sync {
    fn hash(&self, password: &str, salt: &str) -> String;

    fn verify(&self, password: &str, stored: &str) -> bool;
}

/// Test stand-in that stores the password in the clear.
#[derive(Debug, Default, Clone, Copy)]
pub struct StubHasher;

impl PasswordHasher for StubHasher {
    fn hash(&self, password: &str, _salt: &str) -> String {
        format!("plain:{password}")
    }

    fn verify(&self, password: &str, stored: &str) -> bool {
        stored.strip_prefix("plain:") == Some(password)
    }
}

/// `sha256$<salt>$<hex digest of salt:password>`.
#[derive(Debug, Default, Clone, Copy)]
pub struct SaltedSha256;

impl SaltedSha256 {
    fn digest(salt: &str, password: &str) -> String {
        let mut h = Sha256::new();
        h.update(salt.as_bytes());
        h.update(b":");
        h.update(password.as_bytes());
        hex::encode(h.finalize())
    }
}

impl PasswordHasher for SaltedSha256 {
    fn hash(&self, password: &str, salt: &str) -> String {
        format!("sha256${salt}${}", Self::digest(salt, password))
    }

    fn verify(&self, password: &str, stored: &str) -> bool {
        let mut parts = stored.splitn(3, '$');
        match (parts.next(), parts.next(), parts.next()) {
            (Some("sha256"), Some(salt), Some(digest)) => Self::digest(salt, password) == digest,
            _ => false,
        }
    }
}
