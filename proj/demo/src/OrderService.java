package demo;

import java.util.ArrayList;
import java.util.List;
import java.util.Map;

public class OrderService {
    private final Map<String, Integer> stock;
    private final List<String> audit = new ArrayList<>();
    private double discountRate = 0.05;

    public OrderService(Map<String, Integer> stock) {
        this.stock = stock;
    }

    public double placeOrder(String customer, Map<String, Integer> items, Map<String, Double> prices) {
        if (customer == null || customer.isEmpty()) {
            throw new IllegalArgumentException("customer is required");
        }
        for (Map.Entry<String, Integer> item : items.entrySet()) {
            int available = stock.getOrDefault(item.getKey(), 0);
            if (available < item.getValue()) {
                throw new IllegalStateException("not enough " + item.getKey());
            }
        }
        double subtotal = 0;
        for (Map.Entry<String, Integer> item : items.entrySet()) {
            double price = prices.getOrDefault(item.getKey(), 0.0);
            subtotal += price * item.getValue();
        }
        double discount = 0;
        if (subtotal > 500) {
            discount = subtotal * discountRate;
        }
        double total = subtotal - discount;
        for (Map.Entry<String, Integer> item : items.entrySet()) {
            stock.put(item.getKey(), stock.get(item.getKey()) - item.getValue());
        }
        audit.add(customer + " ordered " + items.size() + " items");
        audit.add(customer + " paid " + total);
        return total;
    }

    public String renderInvoice(String customer, List<String> lines, double total) {
        StringBuilder out = new StringBuilder();
        out.append("INVOICE\n");
        out.append("Customer: ").append(customer).append('\n');
        out.append("----------------\n");
        int number = 1;
        for (String line : lines) {
            out.append(number).append(". ").append(line).append('\n');
            number++;
        }
        out.append("----------------\n");
        out.append("Total: ").append(String.format("%.2f", total)).append('\n');
        if (total > 1000) {
            out.append("Thank you for your large order!\n");
        }
        return out.toString();
    }
}
