//! Check-in loading, filtering, splitting, and the venue catalog.
//!
//! Two on-disk layouts are understood:
//!
//! * `raw` — header-less, tab- or comma-separated, with columns
//!   `user_id, venue_id, category_id, category_name, lat, lon,
//!   tz_offset_minutes, utc_time`. This is the layout of the public
//!   Foursquare check-in dumps; `category_id` is carried but unused.
//! * `canonical` — the crate's own sorted event CSV with a header:
//!   `user_id,venue_id,category,lat,lon,timestamp_iso8601`.
//!
//! Timestamps are normalized to UTC on load; the tz offset column is parsed
//! for validation but kept only as per-event metadata. Canonical files carry
//! visited venues only, so round-tripping is exact for datasets in which
//! every venue has at least one event (which `preprocess` guarantees).

use std::collections::{BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};

use crate::error::{Error, Result};
use crate::types::{days_to_secs, CategoryId, FirstLevelId, Timestamp, UserId, VenueId};

/// A venue with its second-level category and coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Venue {
    pub id: String,
    pub category: CategoryId,
    /// Coarse parent category, filled in by [`apply_hierarchy`].
    pub first_level: Option<FirstLevelId>,
    pub lat: f64,
    pub lon: f64,
}

/// One (user, venue, timestamp) interaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VisitEvent {
    pub user: UserId,
    pub venue: VenueId,
    pub t: Timestamp,
    /// Local-time offset of the check-in, minutes east of UTC. Metadata only.
    pub tz_offset_min: i32,
}

/// Venue catalog: dense venue table plus category lookup tables.
///
/// Venues are sorted by id string, so `VenueId` order equals id order.
/// Categories and first-level labels are likewise sorted.
#[derive(Clone, Debug, Default)]
pub struct Catalog {
    venues: Vec<Venue>,
    by_id: HashMap<String, VenueId>,
    categories: Vec<String>,
    category_by_name: HashMap<String, CategoryId>,
    first_levels: Vec<String>,
    cat_first: Vec<Option<FirstLevelId>>,
    by_category: Vec<Vec<VenueId>>,
}

impl Catalog {
    pub fn len(&self) -> usize {
        self.venues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.venues.is_empty()
    }

    #[inline]
    pub fn venue(&self, v: VenueId) -> &Venue {
        &self.venues[v.idx()]
    }

    pub fn venues(&self) -> &[Venue] {
        &self.venues
    }

    pub fn venue_by_id(&self, id: &str) -> Option<VenueId> {
        self.by_id.get(id).copied()
    }

    #[inline]
    pub fn category_name(&self, c: CategoryId) -> &str {
        &self.categories[c.idx()]
    }

    pub fn category_by_name(&self, name: &str) -> Option<CategoryId> {
        self.category_by_name.get(name).copied()
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn first_level_name(&self, f: FirstLevelId) -> &str {
        &self.first_levels[f.idx()]
    }

    /// First-level parent of a category, if a hierarchy was applied and
    /// covers it.
    pub fn first_level_of_category(&self, c: CategoryId) -> Option<FirstLevelId> {
        self.cat_first.get(c.idx()).copied().flatten()
    }

    /// Venues of one category, ascending by venue id.
    pub fn venues_in_category(&self, c: CategoryId) -> &[VenueId] {
        &self.by_category[c.idx()]
    }

    /// Build a catalog from `(id, category_name, lat, lon)` rows.
    /// Duplicate ids keep the first occurrence's category and coordinates.
    pub fn from_rows(rows: Vec<(String, String, f64, f64)>) -> Catalog {
        let mut first: HashMap<String, (String, f64, f64)> = HashMap::new();
        let mut order: Vec<String> = Vec::new();
        for (id, cat, lat, lon) in rows {
            if !first.contains_key(&id) {
                order.push(id.clone());
                first.insert(id, (cat, lat, lon));
            }
        }
        order.sort_unstable();

        let mut cat_names: BTreeSet<String> = BTreeSet::new();
        for id in &order {
            cat_names.insert(first[id].0.clone());
        }
        let categories: Vec<String> = cat_names.into_iter().collect();
        let category_by_name: HashMap<String, CategoryId> = categories
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), CategoryId(i as u32)))
            .collect();

        let mut venues = Vec::with_capacity(order.len());
        let mut by_id = HashMap::with_capacity(order.len());
        let mut by_category = vec![Vec::new(); categories.len()];
        for (i, id) in order.into_iter().enumerate() {
            let (cat, lat, lon) = first.remove(&id).expect("id collected above");
            let category = category_by_name[&cat];
            by_id.insert(id.clone(), VenueId(i as u32));
            by_category[category.idx()].push(VenueId(i as u32));
            venues.push(Venue {
                id,
                category,
                first_level: None,
                lat,
                lon,
            });
        }

        let cat_first = vec![None; categories.len()];
        Catalog {
            venues,
            by_id,
            categories,
            category_by_name,
            first_levels: Vec::new(),
            cat_first,
            by_category,
        }
    }
}

/// Dense user table, sorted by user id string.
#[derive(Clone, Debug, Default)]
pub struct UserTable {
    ids: Vec<String>,
    by_id: HashMap<String, UserId>,
}

impl UserTable {
    pub fn from_ids(mut ids: Vec<String>) -> UserTable {
        ids.sort_unstable();
        ids.dedup();
        let by_id = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), UserId(i as u32)))
            .collect();
        UserTable { ids, by_id }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    pub fn name(&self, u: UserId) -> &str {
        &self.ids[u.idx()]
    }

    pub fn by_name(&self, id: &str) -> Option<UserId> {
        self.by_id.get(id).copied()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }
}

/// A chronologically sorted event log plus its catalog and user table.
#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub events: Vec<VisitEvent>,
    pub catalog: Catalog,
    pub users: UserTable,
}

/// Train/post boundary expressed in days from the first event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSpec {
    pub t_train_days: f64,
    pub t_max_days: f64,
}

impl SplitSpec {
    pub fn new(t_train_days: f64, t_max_days: f64) -> Result<SplitSpec> {
        if !(t_train_days > 0.0 && t_train_days < t_max_days) {
            return Err(Error::invalid(format!(
                "split requires 0 < t_train < t_max, got {t_train_days} / {t_max_days}"
            )));
        }
        Ok(SplitSpec {
            t_train_days,
            t_max_days,
        })
    }
}

/// What to do with rows that fail to parse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowPolicy {
    /// Drop the offending row and count it.
    Skip,
    /// Abort the load with an error.
    Fail,
}

/// Input layout. `Auto` sniffs the canonical header.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Raw,
    Canonical,
    Auto,
}

/// Summary of a load: rows seen, events kept, rows dropped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub rows: u64,
    pub loaded: u64,
    pub skipped: u64,
}

const CANONICAL_HEADER: [&str; 6] = [
    "user_id",
    "venue_id",
    "category",
    "lat",
    "lon",
    "timestamp_iso8601",
];

/// Default category exclusion list: transport, familiar private places,
/// and unknown labels.
pub const DEFAULT_EXCLUDED_CATEGORIES: [&str; 16] = [
    "Train",
    "Transport Hub",
    "Transportation Service",
    "Travel and Transportation",
    "Boat or Ferry",
    "Platform",
    "Road",
    "Island",
    "River",
    "Housing Development",
    "Meeting Room",
    "Conference Room",
    "Office",
    "Home (private)",
    "Apartment or Condo",
    "Unknown",
];

pub fn default_exclusions() -> BTreeSet<String> {
    DEFAULT_EXCLUDED_CATEGORIES
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// Parse either RFC 3339 (`2012-04-03T18:00:09Z`) or the legacy
/// `Tue Apr 03 18:00:09 +0000 2012` stamp. Returns UTC epoch seconds.
pub fn parse_timestamp(s: &str) -> Result<Timestamp> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.timestamp());
    }
    if let Ok(dt) = DateTime::parse_from_str(s, "%a %b %d %H:%M:%S %z %Y") {
        return Ok(dt.timestamp());
    }
    // Last resort: naive stamp treated as UTC.
    if let Ok(dt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S") {
        return Ok(dt.and_utc().timestamp());
    }
    Err(Error::invalid(format!("unparsable timestamp {s:?}")))
}

/// Format UTC epoch seconds as `YYYY-MM-DDThh:mm:ssZ`.
pub fn format_timestamp(t: Timestamp) -> String {
    DateTime::<Utc>::from_timestamp(t, 0)
        .expect("timestamp in range")
        .format("%Y-%m-%dT%H:%M:%SZ")
        .to_string()
}

struct ParsedRow {
    user: String,
    venue: String,
    category: String,
    lat: f64,
    lon: f64,
    tz_offset_min: i32,
    t: Timestamp,
}

fn parse_raw_fields(fields: &[String]) -> std::result::Result<ParsedRow, String> {
    if fields.len() != 8 {
        return Err(format!("expected 8 columns, got {}", fields.len()));
    }
    let lat: f64 = fields[4].trim().parse().map_err(|_| "bad lat")?;
    let lon: f64 = fields[5].trim().parse().map_err(|_| "bad lon")?;
    if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
        return Err(format!("coordinates out of range ({lat}, {lon})"));
    }
    let tz_offset_min: i32 = fields[6].trim().parse().map_err(|_| "bad tz offset")?;
    let t = parse_timestamp(&fields[7]).map_err(|e| e.to_string())?;
    Ok(ParsedRow {
        user: fields[0].clone(),
        venue: fields[1].clone(),
        category: fields[3].clone(),
        lat,
        lon,
        tz_offset_min,
        t,
    })
}

fn parse_canonical_fields(fields: &[String]) -> std::result::Result<ParsedRow, String> {
    if fields.len() != 6 {
        return Err(format!("expected 6 columns, got {}", fields.len()));
    }
    let lat: f64 = fields[3].trim().parse().map_err(|_| "bad lat")?;
    let lon: f64 = fields[4].trim().parse().map_err(|_| "bad lon")?;
    if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
        return Err(format!("coordinates out of range ({lat}, {lon})"));
    }
    let t = parse_timestamp(&fields[5]).map_err(|e| e.to_string())?;
    Ok(ParsedRow {
        user: fields[0].clone(),
        venue: fields[1].clone(),
        category: fields[2].clone(),
        lat,
        lon,
        tz_offset_min: 0,
        t,
    })
}

/// Load a check-in file into a [`Dataset`].
///
/// Events come back sorted by timestamp (ties keep file order) and the
/// catalog is deduplicated with first occurrence winning.
pub fn load_checkins(
    path: impl AsRef<Path>,
    format: Format,
    policy: RowPolicy,
) -> Result<(Dataset, LoadReport)> {
    let mut buf = Vec::new();
    std::fs::File::open(path.as_ref())?.read_to_end(&mut buf)?;
    load_checkins_from_bytes(&buf, format, policy)
}

/// Same as [`load_checkins`] but from an in-memory buffer.
pub fn load_checkins_from_bytes(
    buf: &[u8],
    format: Format,
    policy: RowPolicy,
) -> Result<(Dataset, LoadReport)> {
    // Sniff the delimiter from the first line; the public dumps are TSV.
    let first_line_end = buf.iter().position(|&b| b == b'\n').unwrap_or(buf.len());
    let first_line = String::from_utf8_lossy(&buf[..first_line_end]);
    let delim = if first_line.contains('\t') { b'\t' } else { b',' };

    let format = match format {
        Format::Auto => {
            let head = first_line.trim_start_matches('\u{feff}').trim();
            if head.starts_with("user_id") {
                Format::Canonical
            } else {
                Format::Raw
            }
        }
        f => f,
    };

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delim)
        .has_headers(format == Format::Canonical)
        .flexible(true)
        .from_reader(buf);

    let mut report = LoadReport::default();
    let mut rows: Vec<ParsedRow> = Vec::new();
    for (i, record) in reader.byte_records().enumerate() {
        let row_no = i as u64 + 1;
        report.rows += 1;
        let parsed = record
            .map_err(|e| e.to_string())
            .and_then(|rec| {
                let fields: Vec<String> = rec
                    .iter()
                    .map(|f| String::from_utf8_lossy(f).into_owned())
                    .collect();
                match format {
                    Format::Raw => parse_raw_fields(&fields),
                    Format::Canonical => parse_canonical_fields(&fields),
                    Format::Auto => unreachable!("resolved above"),
                }
            });
        match parsed {
            Ok(row) => {
                report.loaded += 1;
                rows.push(row);
            }
            Err(msg) => match policy {
                RowPolicy::Skip => report.skipped += 1,
                RowPolicy::Fail => return Err(Error::Row { row: row_no, msg }),
            },
        }
    }

    Ok((assemble(rows), report))
}

fn assemble(rows: Vec<ParsedRow>) -> Dataset {
    let catalog = Catalog::from_rows(
        rows.iter()
            .map(|r| (r.venue.clone(), r.category.clone(), r.lat, r.lon))
            .collect(),
    );
    let users = UserTable::from_ids(rows.iter().map(|r| r.user.clone()).collect());
    let mut events: Vec<VisitEvent> = rows
        .iter()
        .map(|r| VisitEvent {
            user: users.by_name(&r.user).expect("user interned"),
            venue: catalog.venue_by_id(&r.venue).expect("venue interned"),
            t: r.t,
            tz_offset_min: r.tz_offset_min,
        })
        .collect();
    events.sort_by_key(|e| e.t);
    Dataset {
        events,
        catalog,
        users,
    }
}

impl Dataset {
    /// First event timestamp, if any.
    pub fn start(&self) -> Option<Timestamp> {
        self.events.first().map(|e| e.t)
    }

    /// Rebuild the dataset keeping only events accepted by `keep`.
    /// Venues without remaining events are dropped unless `keep_all_venues`;
    /// users without remaining events are always dropped.
    pub fn filtered(&self, keep: impl Fn(&VisitEvent) -> bool, keep_all_venues: bool) -> Dataset {
        let kept: Vec<&VisitEvent> = self.events.iter().filter(|e| keep(e)).collect();

        let venue_rows: Vec<(String, String, f64, f64)> = if keep_all_venues {
            self.catalog
                .venues()
                .iter()
                .map(|v| {
                    (
                        v.id.clone(),
                        self.catalog.category_name(v.category).to_string(),
                        v.lat,
                        v.lon,
                    )
                })
                .collect()
        } else {
            let mut used: BTreeSet<VenueId> = BTreeSet::new();
            for e in &kept {
                used.insert(e.venue);
            }
            used.iter()
                .map(|&vid| {
                    let v = self.catalog.venue(vid);
                    (
                        v.id.clone(),
                        self.catalog.category_name(v.category).to_string(),
                        v.lat,
                        v.lon,
                    )
                })
                .collect()
        };
        let catalog = Catalog::from_rows(venue_rows);
        let users = UserTable::from_ids(
            kept.iter()
                .map(|e| self.users.name(e.user).to_string())
                .collect(),
        );
        let events = kept
            .into_iter()
            .map(|e| VisitEvent {
                user: users
                    .by_name(self.users.name(e.user))
                    .expect("user interned"),
                venue: catalog
                    .venue_by_id(&self.catalog.venue(e.venue).id)
                    .expect("venue interned"),
                t: e.t,
                tz_offset_min: e.tz_offset_min,
            })
            .collect();
        Dataset {
            events,
            catalog,
            users,
        }
    }

    /// Serialize to the canonical sorted event CSV.
    pub fn canonical_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&CANONICAL_HEADER.join(","));
        out.push('\n');
        for e in &self.events {
            let v = self.catalog.venue(e.venue);
            let cat = self.catalog.category_name(v.category);
            let needs_quotes = cat.contains(',') || cat.contains('"');
            let cat_field = if needs_quotes {
                format!("\"{}\"", cat.replace('"', "\"\""))
            } else {
                cat.to_string()
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.users.name(e.user),
                v.id,
                cat_field,
                v.lat,
                v.lon,
                format_timestamp(e.t)
            ));
        }
        out
    }
}

/// Remove all events whose venue category is in `excluded`, then drop
/// venues left with zero events. Idempotent for a fixed exclusion set.
pub fn preprocess(d: &Dataset, excluded: &BTreeSet<String>) -> Dataset {
    if excluded.is_empty() {
        return d.clone();
    }
    let banned: Vec<bool> = d
        .catalog
        .categories()
        .iter()
        .map(|c| excluded.contains(c))
        .collect();
    d.filtered(
        |e| !banned[d.catalog.venue(e.venue).category.idx()],
        false,
    )
}

/// Partition into train (`t <= start + t_train`) and post
/// (`start + t_train < t <= start + t_max`). Events beyond `t_max` are
/// discarded. Both halves share the full catalog and user table so venue
/// and user ids stay valid across the split.
pub fn split(d: &Dataset, spec: SplitSpec) -> Result<(Dataset, Dataset)> {
    SplitSpec::new(spec.t_train_days, spec.t_max_days)?;
    let start = d.start().unwrap_or(0);
    let t_train = start + days_to_secs(spec.t_train_days);
    let t_max = start + days_to_secs(spec.t_max_days);

    let train_events: Vec<VisitEvent> = d.events.iter().filter(|e| e.t <= t_train).copied().collect();
    let post_events: Vec<VisitEvent> = d
        .events
        .iter()
        .filter(|e| e.t > t_train && e.t <= t_max)
        .copied()
        .collect();

    let train = Dataset {
        events: train_events,
        catalog: d.catalog.clone(),
        users: d.users.clone(),
    };
    let post = Dataset {
        events: post_events,
        catalog: d.catalog.clone(),
        users: d.users.clone(),
    };
    Ok((train, post))
}

/// Keep a uniform random sample of `n` users with all their events.
/// With `keep_full_catalog` the venue catalog is left untouched so that
/// candidate pools stay city-sized; otherwise it is pruned to visited
/// venues.
pub fn subsample_users(
    d: &Dataset,
    n: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
    keep_full_catalog: bool,
) -> Result<Dataset> {
    use rand::Rng;
    let total = d.users.len();
    if n > total {
        return Err(Error::invalid(format!(
            "cannot sample {n} users from a population of {total}"
        )));
    }
    // partial Fisher-Yates over the (sorted) user index
    let mut order: Vec<u32> = (0..total as u32).collect();
    for i in 0..n {
        let j = rng.gen_range(i..total);
        order.swap(i, j);
    }
    let keep: std::collections::HashSet<UserId> =
        order[..n].iter().map(|&i| UserId(i)).collect();
    Ok(d.filtered(|e| keep.contains(&e.user), keep_full_catalog))
}

/// Load a two-column `second_level,first_level` mapping. A missing file is
/// not an error at the call sites that treat the hierarchy as optional;
/// this function itself requires a readable path.
pub fn load_category_hierarchy(path: impl AsRef<Path>) -> Result<HashMap<String, String>> {
    let mut buf = Vec::new();
    std::fs::File::open(path.as_ref())?.read_to_end(&mut buf)?;
    load_category_hierarchy_from_bytes(&buf)
}

pub fn load_category_hierarchy_from_bytes(buf: &[u8]) -> Result<HashMap<String, String>> {
    let first_line_end = buf.iter().position(|&b| b == b'\n').unwrap_or(buf.len());
    let first_line = String::from_utf8_lossy(&buf[..first_line_end]);
    let delim = if first_line.contains('\t') { b'\t' } else { b',' };

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delim)
        .has_headers(false)
        .flexible(true)
        .from_reader(buf);
    let mut map = HashMap::new();
    for (i, record) in reader.byte_records().enumerate() {
        let rec = record?;
        if rec.is_empty() {
            continue;
        }
        if rec.len() < 2 {
            return Err(Error::Row {
                row: i as u64 + 1,
                msg: "expected 2 columns".to_string(),
            });
        }
        let second = String::from_utf8_lossy(&rec[0]).trim().to_string();
        let first = String::from_utf8_lossy(&rec[1]).trim().to_string();
        if second.is_empty() {
            continue;
        }
        if let Some(prev) = map.get(&second) {
            if prev != &first {
                return Err(Error::invalid(format!(
                    "category {second:?} mapped to both {prev:?} and {first:?}"
                )));
            }
        }
        map.insert(second, first);
    }
    Ok(map)
}

/// Attach first-level labels to catalog venues from a hierarchy map.
/// Categories absent from the map keep `first_level = None`.
pub fn apply_hierarchy(catalog: &mut Catalog, hierarchy: &HashMap<String, String>) {
    let mut names: BTreeSet<String> = BTreeSet::new();
    for cat in catalog.categories.iter() {
        if let Some(f) = hierarchy.get(cat) {
            names.insert(f.clone());
        }
    }
    catalog.first_levels = names.into_iter().collect();
    let index: HashMap<&str, FirstLevelId> = catalog
        .first_levels
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), FirstLevelId(i as u32)))
        .collect();
    let cat_to_first: Vec<Option<FirstLevelId>> = catalog
        .categories
        .iter()
        .map(|c| hierarchy.get(c).map(|f| index[f.as_str()]))
        .collect();
    for v in catalog.venues.iter_mut() {
        v.first_level = cat_to_first[v.category.idx()];
    }
    catalog.cat_first = cat_to_first;
}
