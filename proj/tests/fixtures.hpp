#ifndef LIMDIST_TESTS_FIXTURES_HPP
#define LIMDIST_TESTS_FIXTURES_HPP

#include <filesystem>
#include <map>
#include <string>

#include <limdist/zero_store.hpp>

namespace fixtures
{

inline const limdist::zero_dataset &zeta_zeros(double height)
{
    static std::map<double, limdist::zero_dataset> cache;
    auto it = cache.find(height);
    if (it == cache.end()) {
        it = cache.emplace(height, limdist::compute_zeta_zeros(height)).first;
    }
    return it->second;
}

inline const limdist::zero_dataset &dirichlet_zeros(std::uint64_t q, double height)
{
    static std::map<std::pair<std::uint64_t, double>, limdist::zero_dataset> cache;
    const auto key = std::make_pair(q, height);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, limdist::compute_dirichlet_zeros(q, height)).first;
    }
    return it->second;
}

inline std::string temp_path(const std::string &name)
{
    const auto dir = std::filesystem::temp_directory_path() / "limdist_tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

} // namespace fixtures

#endif
