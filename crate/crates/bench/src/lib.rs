//! Shared fixtures for the benchmarks.

use structgen::codec::{EventRecord, Mention};
use structgen::schema::EventSchema;
use structgen::span_index::{tokenize, TokenizedInput};

pub const SENTENCE: &str =
    "The man returned to Los Angeles from Mexico following his capture Tuesday by bounty hunters.";

pub fn schema() -> EventSchema {
    EventSchema::parse(
        "Transport: Artifact, Destination, Origin, Vehicle, Agent\n\
         Arrest-Jail: Person, Time, Agent, Place\n\
         Attack: Attacker, Target, Instrument, Place\n\
         Transfer-Money: Giver, Recipient, Money\n",
    )
    .expect("fixture schema parses")
}

pub fn input() -> TokenizedInput {
    tokenize(SENTENCE)
}

pub fn records() -> Vec<EventRecord> {
    vec![
        EventRecord::new("Transport", Mention::at(["returned"], 2))
            .with_arg("Artifact", Mention::at(["The", "man"], 0))
            .with_arg("Destination", Mention::at(["Los", "Angeles"], 4))
            .with_arg("Origin", Mention::at(["Mexico"], 7)),
        EventRecord::new("Arrest-Jail", Mention::at(["capture"], 10))
            .with_arg("Person", Mention::at(["The", "man"], 0))
            .with_arg("Time", Mention::at(["Tuesday"], 11))
            .with_arg("Agent", Mention::at(["bounty", "hunters"], 13)),
    ]
}
