#include "common.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>

namespace pcb {
namespace {

std::mutex g_mutex;
std::vector<std::string> g_messages;

void stderr_handler(const char* msg, void*) { std::fprintf(stderr, "warning: %s\n", msg); }

WarningHandler g_handler = stderr_handler;
void* g_user = nullptr;

} // namespace

void warn(const std::string& msg)
{
    std::lock_guard<std::mutex> lock(g_mutex);
    if (std::find(g_messages.begin(), g_messages.end(), msg) != g_messages.end())
        return;
    g_messages.push_back(msg);
    if (g_handler)
        g_handler(msg.c_str(), g_user);
}

std::vector<std::string> warnings()
{
    std::lock_guard<std::mutex> lock(g_mutex);
    return g_messages;
}

void clear_warnings()
{
    std::lock_guard<std::mutex> lock(g_mutex);
    g_messages.clear();
}

void set_warning_handler(WarningHandler handler, void* user)
{
    std::lock_guard<std::mutex> lock(g_mutex);
    g_handler = handler;
    g_user = user;
}

} // namespace pcb
