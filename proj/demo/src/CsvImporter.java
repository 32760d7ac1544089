package demo;

import java.io.BufferedReader;
import java.io.IOException;
import java.io.Reader;
import java.util.ArrayList;
import java.util.List;

public class CsvImporter {
    private final List<String> errors = new ArrayList<>();
    private char separator = ',';

    public List<String[]> importRows(Reader source, int expectedColumns) throws IOException {
        List<String[]> rows = new ArrayList<>();
        BufferedReader reader = new BufferedReader(source);
        String header = reader.readLine();
        if (header == null) {
            return rows;
        }
        String[] names = header.split(String.valueOf(separator));
        if (names.length != expectedColumns) {
            errors.add("header has " + names.length + " columns");
        }
        String line;
        int number = 1;
        while ((line = reader.readLine()) != null) {
            number++;
            if (line.isBlank() || line.startsWith("#")) {
                continue;
            }
            String[] cells = line.split(String.valueOf(separator), -1);
            if (cells.length != expectedColumns) {
                errors.add("line " + number + ": expected " + expectedColumns + " cells");
                continue;
            }
            for (int i = 0; i < cells.length; i++) {
                cells[i] = cells[i].trim();
            }
            rows.add(cells);
        }
        if (!errors.isEmpty()) {
            System.err.println(errors.size() + " problems while importing");
        }
        return rows;
    }

    public String loadSetting(java.util.Properties props, String key, String fallback) {
        String value;
        try {
            value = props.getProperty(key);
            if (value == null) {
                value = System.getenv(key.toUpperCase().replace('.', '_'));
            }
        } catch (SecurityException e) {
            errors.add("cannot read " + key);
            value = null;
        }
        if (value == null || value.isBlank()) {
            value = fallback;
        }
        String trimmed = value.trim();
        errors.add("setting " + key + " = " + trimmed);
        return trimmed;
    }
}
