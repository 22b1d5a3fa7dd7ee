//! In-memory sessions: decoded base semantics, a per-frame edit overlay and
//! a shared render cache.

use std::collections::{BTreeMap, HashMap};
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use ihvc_core::{apply_edit, CodedSequence, Edit, FrameRenderer, QuantConfig, Semantics};
use lru::LruCache;
use serde::Serialize;
use uuid::Uuid;

use crate::error::ApiError;

pub const DEFAULT_CACHE_FRAMES: usize = 64;
pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);

#[derive(Debug, Clone, Serialize)]
pub struct SessionInfo {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    pub frame_count: usize,
    pub steps: QuantConfig,
}

pub struct Session {
    pub info: SessionInfo,
    pub renderer: Arc<FrameRenderer>,
    base: Vec<Semantics>,
    /// Edits per frame, applied in order on top of `base`.
    overlay: BTreeMap<usize, Vec<Edit>>,
    revision: u64,
}

impl Session {
    pub fn load(id: Uuid, bytes: &[u8]) -> Result<Self, ApiError> {
        let cs = CodedSequence::from_bytes(bytes)?;
        let (renderer, base) = FrameRenderer::from_coded(&cs)?;
        Ok(Self {
            info: SessionInfo {
                id: id.to_string(),
                width: renderer.width(),
                height: renderer.height(),
                fps: cs.header.fps.as_f64(),
                frame_count: base.len(),
                steps: cs.header.quant,
            },
            renderer: Arc::new(renderer),
            base,
            overlay: BTreeMap::new(),
            revision: 0,
        })
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn frame_count(&self) -> usize {
        self.base.len()
    }

    fn check_frame(&self, frame: usize) -> Result<(), ApiError> {
        if frame < self.base.len() {
            Ok(())
        } else {
            Err(ApiError::frame_out_of_range(frame, self.base.len()))
        }
    }

    fn effective_unchecked(&self, frame: usize) -> Semantics {
        let mut s = self.base[frame];
        for e in self.overlay.get(&frame).into_iter().flatten() {
            s = apply_edit(&s, e).expect("overlay edits were validated when posted");
        }
        s
    }

    /// Base semantics with the overlay applied.
    pub fn effective(&self, frame: usize) -> Result<Semantics, ApiError> {
        self.check_frame(frame)?;
        Ok(self.effective_unchecked(frame))
    }

    /// Appends `edit` to every frame in `a..=b`. Either every frame accepts
    /// the edit or nothing changes.
    pub fn edit(&mut self, a: usize, b: usize, edit: Edit) -> Result<u64, ApiError> {
        if a > b {
            return Err(ApiError::bad_request(
                "invalid_range",
                format!("frame range [{a}, {b}] is reversed"),
            ));
        }
        self.check_frame(b)?;
        edit.check()
            .map_err(|e| ApiError::bad_request("invalid_edit", e.to_string()))?;
        for l in a..=b {
            apply_edit(&self.effective_unchecked(l), &edit)
                .map_err(|e| ApiError::bad_request("invalid_edit", format!("frame {l}: {e}")))?;
        }
        for l in a..=b {
            self.overlay.entry(l).or_default().push(edit.clone());
        }
        self.revision += 1;
        Ok(self.revision)
    }

    /// Drops every edit. A session without edits keeps its revision.
    pub fn reset(&mut self) -> u64 {
        if !self.overlay.is_empty() {
            self.overlay.clear();
            self.revision += 1;
        }
        self.revision
    }
}

struct Entry {
    session: Arc<RwLock<Session>>,
    last_access: Instant,
}

type CacheKey = (Uuid, usize, u64);

/// All live sessions plus the PNG cache keyed by (session, frame, revision).
pub struct SessionStore {
    sessions: Mutex<HashMap<Uuid, Entry>>,
    cache: Mutex<LruCache<CacheKey, Arc<Vec<u8>>>>,
    idle_timeout: Duration,
}

impl SessionStore {
    pub fn new(cache_frames: usize, idle_timeout: Duration) -> Self {
        let cap = NonZeroUsize::new(cache_frames.max(1)).expect("non-zero");
        Self {
            sessions: Mutex::new(HashMap::new()),
            cache: Mutex::new(LruCache::new(cap)),
            idle_timeout,
        }
    }

    pub fn insert(&self, session: Session) -> Uuid {
        let id: Uuid = session.info.id.parse().expect("session ids are UUIDs");
        self.sessions.lock().unwrap().insert(
            id,
            Entry {
                session: Arc::new(RwLock::new(session)),
                last_access: Instant::now(),
            },
        );
        id
    }

    /// Looks up a live session and refreshes its idle timer.
    pub fn get(&self, id: &str) -> Result<(Uuid, Arc<RwLock<Session>>), ApiError> {
        let uuid: Uuid = id.parse().map_err(|_| ApiError::unknown_session(id))?;
        let mut map = self.sessions.lock().unwrap();
        let now = Instant::now();
        match map.get_mut(&uuid) {
            Some(e) if now.duration_since(e.last_access) <= self.idle_timeout => {
                e.last_access = now;
                Ok((uuid, e.session.clone()))
            }
            Some(_) => {
                map.remove(&uuid);
                drop(map);
                self.forget_frames(uuid);
                Err(ApiError::unknown_session(id))
            }
            None => Err(ApiError::unknown_session(id)),
        }
    }

    pub fn remove(&self, id: &str) -> Result<(), ApiError> {
        let uuid: Uuid = id.parse().map_err(|_| ApiError::unknown_session(id))?;
        let removed = self.sessions.lock().unwrap().remove(&uuid);
        match removed {
            Some(_) => {
                self.forget_frames(uuid);
                Ok(())
            }
            None => Err(ApiError::unknown_session(id)),
        }
    }

    /// Drops sessions idle for longer than the timeout; returns how many.
    pub fn expire_idle(&self) -> usize {
        let now = Instant::now();
        let expired: Vec<Uuid> = {
            let mut map = self.sessions.lock().unwrap();
            let ids: Vec<Uuid> = map
                .iter()
                .filter(|(_, e)| now.duration_since(e.last_access) > self.idle_timeout)
                .map(|(id, _)| *id)
                .collect();
            for id in &ids {
                map.remove(id);
            }
            ids
        };
        for id in &expired {
            self.forget_frames(*id);
        }
        expired.len()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cached(&self, key: &CacheKey) -> Option<Arc<Vec<u8>>> {
        self.cache.lock().unwrap().get(key).cloned()
    }

    pub fn store_frame(&self, key: CacheKey, png: Arc<Vec<u8>>) {
        self.cache.lock().unwrap().put(key, png);
    }

    pub fn cached_frames(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    fn forget_frames(&self, id: Uuid) {
        let mut cache = self.cache.lock().unwrap();
        let stale: Vec<CacheKey> = cache.iter().map(|(k, _)| *k).filter(|k| k.0 == id).collect();
        for k in stale {
            cache.pop(&k);
        }
    }
}
