#pragma once

#include <map>
#include <string>
#include <vector>

#include "vpm/manifest.hpp"
#include "vpm/version.hpp"

namespace vpm {

// What a resolver is allowed to see: the candidate versions of a name and the
// manifest of any candidate. A branch snapshot exposes only its pins; the
// archive exposes everything ever published.
class ResolutionView {
public:
    virtual ~ResolutionView() = default;

    virtual std::vector<Version> available(const std::string& name) const = 0;
    virtual const PackageManifest* find_manifest(const std::string& name,
                                                 const Version& version) const = 0;
};

// Self-contained view for tests and tooling.
class InMemoryView : public ResolutionView {
public:
    void add(PackageManifest manifest) {
        auto& slot = packages_[manifest.name][manifest.version];
        slot = std::move(manifest);
    }

    std::vector<Version> available(const std::string& name) const override {
        std::vector<Version> out;
        auto it = packages_.find(name);
        if (it == packages_.end())
            return out;
        for (const auto& [version, manifest] : it->second)
            out.push_back(version);
        return out;
    }

    const PackageManifest* find_manifest(const std::string& name,
                                         const Version& version) const override {
        auto it = packages_.find(name);
        if (it == packages_.end())
            return nullptr;
        auto vit = it->second.find(version);
        return vit == it->second.end() ? nullptr : &vit->second;
    }

private:
    std::map<std::string, std::map<Version, PackageManifest>> packages_;
};

} // namespace vpm
