//! Compact ids used throughout the crate.
//!
//! String ids from input files are interned into dense indices once at load
//! time. Tables are sorted lexicographically by the original string id, so
//! comparing two ids numerically is the same as comparing the underlying
//! strings. Every deterministic tie-break in the crate relies on that.

use serde::{Deserialize, Serialize};

macro_rules! id_newtype {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(
            Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn idx(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_newtype!(
    /// Index of a user in a [`crate::ingest::UserTable`].
    UserId
);
id_newtype!(
    /// Index of a venue in a [`crate::ingest::Catalog`].
    VenueId
);
id_newtype!(
    /// Index of a second-level category in a [`crate::ingest::Catalog`].
    CategoryId
);
id_newtype!(
    /// Index of a first-level (coarse) category in a [`crate::ingest::Catalog`].
    FirstLevelId
);

/// Unix timestamp in whole seconds, UTC.
pub type Timestamp = i64;

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Convert a duration in days to whole seconds (truncating).
#[inline]
pub fn days_to_secs(days: f64) -> i64 {
    (days * SECONDS_PER_DAY) as i64
}
