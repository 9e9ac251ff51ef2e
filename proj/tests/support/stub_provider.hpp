#pragma once

// Provider whose answers come from a callable, for tests that need to
// script odd responses or count calls.

#include <atomic>
#include <functional>
#include <string>
#include <string_view>
#include <utility>

#include "intelguard/error.hpp"
#include "intelguard/provider.hpp"

namespace intelguard::testing {

class StubProvider final : public LlmProvider {
public:
    using Fn = std::function<std::string(TaskKind, std::string_view)>;

    explicit StubProvider(Fn fn) : fn_(std::move(fn)) {}

    std::string name() const override { return "stub"; }
    std::string complete(TaskKind kind, std::string_view prompt) const override {
        ++calls_;
        return fn_(kind, prompt);
    }
    int calls() const { return calls_; }

private:
    Fn fn_;
    mutable std::atomic<int> calls_{0};
};

inline StubProvider failing_provider() {
    return StubProvider([](TaskKind, std::string_view) -> std::string { throw RetriableError("backend down"); });
}

}  // namespace intelguard::testing
