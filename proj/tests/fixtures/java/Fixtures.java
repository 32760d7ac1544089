package fixtures;

import java.io.IOException;
import java.util.List;
import java.util.Map;

public class Fixtures {
    private int total;
    private final StringBuilder log = new StringBuilder();

    int straightLine(int a, int b) {
        int s = a + b;
        int d = a - b;
        log.append(s);
        log.append(d);
        return s * d;
    }

    int sumArray(int[] xs) {
        int s = 0;
        for (int i = 0; i < xs.length; i++) {
            s += xs[i];
        }
        log.append("sum");
        return s;
    }

    void twoOutputs(int a) {
        int lo = a / 2;
        int hi = a * 2;
        log.append(lo);
        log.append(hi);
    }

    int findFirst(int[] xs, int key) {
        int found = -1;
        for (int i = 0; i < xs.length; i++) {
            if (xs[i] == key) {
                found = i;
                break;
            }
        }
        return found;
    }

    int skipNegatives(List<Integer> values) {
        int count = 0;
        for (int v : values) {
            if (v < 0) {
                continue;
            }
            count++;
        }
        return count;
    }

    int earlyExit(int x) {
        if (x < 0) {
            return -1;
        }
        int y = x * 2;
        total += y;
        return y;
    }

    String classify(int n) {
        if (n > 100) {
            return "big";
        } else if (n > 10) {
            return "medium";
        } else {
            return "small";
        }
    }

    int readAll(java.io.Reader in) throws IOException {
        int n = 0;
        try {
            while (in.read() >= 0) {
                n++;
            }
        } catch (IOException e) {
            log.append(e.getMessage());
            n = -1;
        } finally {
            log.append("done");
        }
        return n;
    }

    int nestedBlocks(int a, int b) {
        int r = 0;
        {
            int t = a * b;
            r = t + 1;
        }
        if (a > b) {
            {
                r += a;
            }
        }
        return r;
    }

    int labeledLoops(int[][] grid) {
        int hits = 0;
        outer:
        for (int[] row : grid) {
            for (int cell : row) {
                if (cell < 0) {
                    continue outer;
                }
                if (cell == 0) {
                    break outer;
                }
                hits++;
            }
        }
        return hits;
    }

    String dayName(int d) {
        String name;
        switch (d) {
            case 1:
                name = "mon";
                break;
            case 2:
                name = "tue";
                break;
            default:
                name = "other";
        }
        log.append(name);
        return name;
    }

    void countdown(int n) {
        int i = n;
        while (i > 0) {
            log.append(i);
            i--;
        }
        log.append("liftoff");
    }

    int doLoop(int limit) {
        int k = 0;
        do {
            k += 3;
        } while (k < limit);
        total = k;
        return k;
    }

    void conditionalAssign(boolean flag) {
        int v;
        if (flag) {
            v = 1;
        } else {
            v = 2;
        }
        log.append(v);
    }

    int maybeAssign(boolean flag, int seed) {
        int v = seed;
        if (flag) {
            v = seed * 10;
        }
        log.append(v);
        return v;
    }

    int tryReturn(String s) {
        try {
            return Integer.parseInt(s);
        } catch (NumberFormatException e) {
            log.append(s);
        }
        return 0;
    }

    void lambdaCapture(List<String> items, String prefix) {
        int width = prefix.length();
        items.forEach(it -> log.append(prefix).append(it));
        log.append(width);
    }

    static int staticHelper(int a) {
        int b = a * a;
        int c = b + a;
        return c;
    }

    int ternaryAndShortCircuit(int a, int b) {
        int m = a > b ? a : b;
        int seen = 0;
        boolean ok = m > 0 && (seen = m) > 1;
        log.append(ok);
        return seen;
    }

    int mapLookup(Map<String, Integer> m, String key) {
        Integer v = m.get(key);
        if (v == null) {
            throw new IllegalArgumentException(key);
        }
        int w = v + 1;
        return w;
    }

    void switchRules(int code) {
        int weight = 0;
        switch (code) {
            case 1 -> weight = 10;
            case 2 -> {
                weight = 20;
                log.append("two");
            }
            default -> log.append("none");
        }
        log.append(weight);
    }

    int tryFinallyReturn(int a) {
        int r = a + 1;
        try {
            r *= 2;
            return r;
        } finally {
            log.append("cleanup");
        }
    }

    String patternBinding(Object o) {
        if (!(o instanceof String str)) {
            return "";
        }
        String trimmed = str.trim();
        log.append(trimmed);
        return trimmed;
    }

    Runnable anonymousShadow(int count) {
        int base = count * 2;
        Runnable r = new Runnable() {
            int base = 5;

            public void run() {
                int count = base + 1;
                log.append(count);
            }
        };
        log.append(base);
        return r;
    }
}
