use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Role {
    Viewer,
    Commenter,
    Editor,
    Owner,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Action {
    Read,
    Comment,
    Edit,
    Admin,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::Viewer, Role::Commenter, Role::Editor, Role::Owner];
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Read, Action::Comment, Action::Edit, Action::Admin];
}

/// Viewer: Read. Commenter: Read, Comment. Editor: Read, Comment, Edit. Owner: everything.
pub fn authorize(role: Role, action: Action) -> bool {
    match role {
        Role::Owner => true,
        Role::Editor => action != Action::Admin,
        Role::Commenter => matches!(action, Action::Read | Action::Comment),
        Role::Viewer => action == Action::Read,
    }
}

/// `None` means the user is not a participant and may do nothing.
pub fn allowed(role: Option<Role>, action: Action) -> bool {
    role.is_some_and(|r| authorize(r, action))
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL.into_iter().find(|r| r.to_string() == s).ok_or_else(|| format!("unknown role '{s}'"))
    }
}
