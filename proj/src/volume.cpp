#include "toothsim/volume.hpp"

#include "json_util.hpp"

#include <fstream>
#include <sstream>

namespace toothsim {

std::string_view tissueName(Tissue t) {
    switch (t) {
    case Tissue::Enamel: return "enamel";
    case Tissue::Dentin: return "dentin";
    case Tissue::Pulp: return "pulp";
    }
    return "unknown";
}

std::optional<Tissue> parseTissue(std::string_view name) {
    for (Tissue t : kAllTissues) {
        if (tissueName(t) == name) {
            return t;
        }
    }
    return std::nullopt;
}

std::size_t& TissueCounts::operator[](Tissue t) {
    switch (t) {
    case Tissue::Enamel: return enamel;
    case Tissue::Dentin: return dentin;
    case Tissue::Pulp: break;
    }
    return pulp;
}

std::size_t TissueCounts::operator[](Tissue t) const {
    return const_cast<TissueCounts&>(*this)[t];
}

SpherePackVolume::SpherePackVolume(std::vector<Sphere> spheres) : spheres_(std::move(spheres)) {
    for (std::size_t i = 0; i < spheres_.size(); ++i) {
        const Sphere& s = spheres_[i];
        if (!(s.radius > 0.0) || !std::isfinite(s.radius)) {
            throw Error("sphere " + std::to_string(i) + ": radius must be positive");
        }
        if (!isFinite(s.center)) {
            throw Error("sphere " + std::to_string(i) + ": center is not finite");
        }
        if (static_cast<unsigned>(s.tissue) > 2) {
            throw Error("sphere " + std::to_string(i) + ": invalid tissue label");
        }
        box_.expand(s.center, s.radius);
        maxRadius_ = std::max(maxRadius_, s.radius);
    }
}

TissueCounts SpherePackVolume::tissueCounts() const {
    TissueCounts c;
    for (const Sphere& s : spheres_) {
        ++c[s.tissue];
    }
    return c;
}

std::size_t SpherePackVolume::removedCount() const {
    return static_cast<std::size_t>(
        std::count_if(spheres_.begin(), spheres_.end(), [](const Sphere& s) { return s.removed; }));
}

void SpherePackVolume::markRemoved(std::size_t index) {
    spheres_.at(index).removed = true;
}

void SpherePackVolume::restoreAll() {
    for (Sphere& s : spheres_) {
        s.removed = false;
    }
}

namespace {

Vec3 readVec3(const nlohmann::json& j, std::string_view what) {
    if (!j.is_array() || j.size() != 3) {
        throw Error(std::string(what) + ": expected an array of 3 numbers");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

} // namespace

SpherePackVolume parseSpherePack(std::string_view text) {
    const nlohmann::json doc = detail::parseJson(text, "sphere pack");
    try {
        const auto& header = doc.at("header");
        const auto& counts = header.at("counts");
        TissueCounts expected;
        expected.enamel = counts.at("enamel").get<std::size_t>();
        expected.dentin = counts.at("dentin").get<std::size_t>();
        expected.pulp = counts.at("pulp").get<std::size_t>();

        std::optional<Aabb> headerBox;
        if (header.contains("boundingBox")) {
            Aabb b;
            b.min = readVec3(header["boundingBox"].at("min"), "boundingBox.min");
            b.max = readVec3(header["boundingBox"].at("max"), "boundingBox.max");
            headerBox = b;
        }

        const auto& arr = doc.at("spheres");
        if (!arr.is_array()) {
            throw Error("sphere pack: 'spheres' must be an array");
        }
        std::vector<Sphere> spheres;
        spheres.reserve(arr.size());
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto& js = arr[i];
            Sphere s;
            s.center = readVec3(js.at("center"), "sphere center");
            s.radius = js.at("radius").get<double>();
            const auto name = js.at("tissue").get<std::string>();
            const auto tissue = parseTissue(name);
            if (!tissue) {
                throw Error("sphere pack: sphere " + std::to_string(i) + " has unknown tissue '" +
                            name + "'");
            }
            s.tissue = *tissue;
            s.removed = js.value("removed", false);
            spheres.push_back(s);
        }
        SpherePackVolume volume(std::move(spheres));
        const TissueCounts actual = volume.tissueCounts();
        if (!(actual == expected)) {
            std::ostringstream msg;
            msg << "sphere pack: header counts (enamel " << expected.enamel << ", dentin "
                << expected.dentin << ", pulp " << expected.pulp << ") do not match file (enamel "
                << actual.enamel << ", dentin " << actual.dentin << ", pulp " << actual.pulp << ")";
            throw Error(msg.str());
        }
        if (headerBox && !volume.empty()) {
            const double tol = 1e-9 * (1.0 + norm(volume.boundingBox().extent()));
            if (!headerBox->contains(volume.boundingBox().min, tol) ||
                !headerBox->contains(volume.boundingBox().max, tol)) {
                throw Error("sphere pack: header bounding box does not contain all spheres");
            }
        }
        return volume;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("sphere pack: ") + e.what());
    }
}

SpherePackVolume loadSpherePack(const std::filesystem::path& path) {
    try {
        return parseSpherePack(detail::readFile(path));
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::string serializeSpherePack(const SpherePackVolume& volume) {
    const TissueCounts c = volume.tissueCounts();
    const Aabb& b = volume.boundingBox();
    nlohmann::json doc;
    doc["header"]["counts"] = {{"enamel", c.enamel}, {"dentin", c.dentin}, {"pulp", c.pulp}};
    if (!volume.empty()) {
        doc["header"]["boundingBox"] = {{"min", {b.min.x, b.min.y, b.min.z}},
                                        {"max", {b.max.x, b.max.y, b.max.z}}};
    }
    auto& arr = doc["spheres"] = nlohmann::json::array();
    for (const Sphere& s : volume.spheres()) {
        nlohmann::json js = {{"center", {s.center.x, s.center.y, s.center.z}},
                             {"radius", s.radius},
                             {"tissue", tissueName(s.tissue)}};
        if (s.removed) {
            js["removed"] = true;
        }
        arr.push_back(std::move(js));
    }
    return doc.dump() + "\n";
}

void saveSpherePack(const SpherePackVolume& volume, const std::filesystem::path& path) {
    detail::writeFile(path, serializeSpherePack(volume));
}

} // namespace toothsim
