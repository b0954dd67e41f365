#pragma once

#include <stdexcept>
#include <string>

namespace seqpred {

// Exit-code mapping used by the CLI lives in cli.cpp; the taxonomy here is
// what the library throws.

// Malformed arguments: empty windows, bad probabilities, invalid schedules.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Values outside the representable range of an operation (level caps,
// index caps, enumeration caps).
struct RangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A value that is syntactically fine but not in the operation's domain,
// e.g. a history symbol missing from a chain's alphabet.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structural preconditions on models: reducible or periodic chains.
struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Observations incompatible with the model that allegedly produced them.
struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The request is well formed but this build cannot serve it (no closed
// form known, oracle unavailable for the spec).
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A configured resource budget was exhausted before the answer resolved.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A randomized search ran out of attempts.
struct SearchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A lazily extended sequence was queried past its depth cap.
struct DepthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem failures, with the offending path in the message.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace seqpred
