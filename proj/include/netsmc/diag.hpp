/*
 * Copyright 2026 The netsmc authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace netsmc {

struct SourcePos {
    std::string file;
    std::size_t line = 0;
    std::size_t col = 0;

    bool known() const { return line > 0; }
};

enum class Severity { Error, Warning };

struct Diagnostic {
    SourcePos pos;
    Severity severity = Severity::Error;
    std::string message;

    /// Renders as `file:line:col: severity: message`.
    std::string str() const {
        std::ostringstream os;
        os << (pos.file.empty() ? "<input>" : pos.file) << ':' << pos.line << ':' << pos.col << ": "
           << (severity == Severity::Error ? "error" : "warning") << ": " << message;
        return os.str();
    }
};

class DiagnosticList {
  public:
    void error(const SourcePos& pos, const std::string& msg) {
        diags_.push_back(Diagnostic{pos, Severity::Error, msg});
    }
    void warning(const SourcePos& pos, const std::string& msg) {
        diags_.push_back(Diagnostic{pos, Severity::Warning, msg});
    }

    bool hasErrors() const {
        for (const auto& d : diags_) {
            if (d.severity == Severity::Error) {
                return true;
            }
        }
        return false;
    }
    bool empty() const { return diags_.empty(); }
    std::size_t size() const { return diags_.size(); }
    const std::vector<Diagnostic>& all() const { return diags_; }

    std::string str() const {
        std::string out;
        for (const auto& d : diags_) {
            out += d.str();
            out += '\n';
        }
        return out;
    }

  private:
    std::vector<Diagnostic> diags_;
};

/// Fatal input error carrying a source position.
class InputError : public std::runtime_error {
  public:
    InputError(const SourcePos& pos, const std::string& msg)
        : std::runtime_error(Diagnostic{pos, Severity::Error, msg}.str()), pos_(pos) {}
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}

    const SourcePos& pos() const { return pos_; }

  private:
    SourcePos pos_;
};

/// Failure inside the verification machinery rather than in user input.
class EngineError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace netsmc
