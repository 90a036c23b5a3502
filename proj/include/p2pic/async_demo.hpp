#pragma once

#include <array>
#include <map>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

namespace p2pic {

// Four-player protocol run in the general asynchronous model, where a player reacts to whichever
// message arrives first. Players: 0=A, 1=B, 2=C, 3=D. Every message is the bit "0".
struct AsyncLeakRun {
    int x = 0;
    std::vector<int> arrival_order_at_b; // senders in the order B received from them
    std::map<std::pair<int, int>, std::string> link_transcript; // (from, to) -> concatenated payloads
    int total_bits = 0;
};

struct AsyncLeakDemo {
    AsyncLeakRun run0, run1;
    bool transcripts_identical = false;
    bool orders_differ = false;
};

inline AsyncLeakRun run_async_leak(int x) {
    AsyncLeakRun run;
    run.x = x;
    struct Event {
        int time, seq, from, to;
        bool operator>(const Event& o) const { return std::tie(time, seq) > std::tie(o.time, o.seq); }
    };
    std::priority_queue<Event, std::vector<Event>, std::greater<>> q;
    int seq = 0;
    auto send = [&](int now, int from, int to) {
        q.push({now + 1, seq++, from, to});
        run.link_transcript[{from, to}] += "0";
        run.total_bits += 1;
    };
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            if (a != b) run.link_transcript[{a, b}];

    const int first = x == 0 ? 2 : 3;
    const int second = x == 0 ? 3 : 2;
    send(0, 0, first);
    while (!q.empty()) {
        Event e = q.top();
        q.pop();
        switch (e.to) {
        case 0: // A
            if (e.from == first) send(e.time, 0, second);
            break;
        case 1: // B echoes to the sender
            run.arrival_order_at_b.push_back(e.from);
            send(e.time, 1, e.from);
            break;
        default: // C, D
            if (e.from == 0) send(e.time, e.to, 1);
            else if (e.from == 1) send(e.time, e.to, 0);
            break;
        }
    }
    return run;
}

inline AsyncLeakDemo demo_general_async_leak() {
    AsyncLeakDemo d;
    d.run0 = run_async_leak(0);
    d.run1 = run_async_leak(1);
    d.transcripts_identical = d.run0.link_transcript == d.run1.link_transcript;
    d.orders_differ = d.run0.arrival_order_at_b != d.run1.arrival_order_at_b;
    return d;
}

} // namespace p2pic
