package demo;

import java.util.HashMap;
import java.util.Map;

public class TextStats {
    private final Map<String, Integer> lastCounts = new HashMap<>();

    public String analyze(String text) {
        String[] words = text.toLowerCase().split("\\s+");
        Map<String, Integer> counts = new HashMap<>();
        for (String word : words) {
            if (word.isEmpty()) {
                continue;
            }
            counts.merge(word, 1, Integer::sum);
        }
        String longest = "";
        for (String word : words) {
            if (word.length() > longest.length()) {
                longest = word;
            }
        }
        int sentences = 0;
        for (int i = 0; i < text.length(); i++) {
            char c = text.charAt(i);
            if (c == '.' || c == '!' || c == '?') {
                sentences++;
            }
        }
        lastCounts.clear();
        lastCounts.putAll(counts);
        StringBuilder summary = new StringBuilder();
        summary.append("words=").append(words.length);
        summary.append(" distinct=").append(counts.size());
        summary.append(" longest=").append(longest);
        summary.append(" sentences=").append(sentences);
        return summary.toString();
    }

    public int[][] multiply(int[][] a, int[][] b) {
        int n = a.length;
        int m = b[0].length;
        int inner = b.length;
        if (a[0].length != inner) {
            throw new IllegalArgumentException("shape mismatch");
        }
        int[][] result = new int[n][m];
        for (int i = 0; i < n; i++) {
            for (int j = 0; j < m; j++) {
                int sum = 0;
                for (int k = 0; k < inner; k++) {
                    sum += a[i][k] * b[k][j];
                }
                result[i][j] = sum;
            }
        }
        return result;
    }

    public String histogram(int[] values, int buckets) {
        int min = Integer.MAX_VALUE;
        int max = Integer.MIN_VALUE;
        for (int v : values) {
            min = Math.min(min, v);
            max = Math.max(max, v);
        }
        int width = Math.max(1, (max - min + buckets) / buckets);
        int[] counts = new int[buckets];
        for (int v : values) {
            int bucket = Math.min(buckets - 1, (v - min) / width);
            counts[bucket]++;
        }
        StringBuilder out = new StringBuilder();
        for (int i = 0; i < buckets; i++) {
            out.append(min + i * width).append(": ");
            out.append("#".repeat(counts[i]));
            out.append('\n');
        }
        return out.toString();
    }
}
